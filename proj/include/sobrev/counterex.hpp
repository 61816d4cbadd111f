#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sobrev/fit.hpp"
#include "sobrev/parallel.hpp"
#include "sobrev/report.hpp"
#include "sobrev/seminorm.hpp"
#include "sobrev/superpose.hpp"

namespace sobrev {

// u_j(x) = b0 on [2k/j, (2k+1)/j), b1 on [(2k+1)/j, (2k+2)/j), on (0, 1).
inline PiecewiseFn square_wave(int j, double b0, double b1) {
  if (j < 1) throw UsageError("square_wave needs j >= 1");
  std::vector<double> breaks(j + 1), vals(j);
  for (int k = 0; k <= j; ++k) breaks[k] = static_cast<double>(k) / j;
  for (int k = 0; k < j; ++k) vals[k] = k % 2 == 0 ? b0 : b1;
  return PiecewiseFn::constant({0.0, 1.0}, std::move(breaks), std::move(vals));
}

// u_*(j x) on (-1, 1): b0 left of -1/j, b1 right of 1/j, linear between.
inline PiecewiseFn ramp_rescale(int j, double b0, double b1) {
  if (j < 1) throw UsageError("ramp_rescale needs j >= 1");
  const double slope = 0.5 * j * (b1 - b0);
  if (j == 1) return PiecewiseFn::affine({-1.0, 1.0}, {-1.0, 1.0}, {b0}, {slope});
  const double w = 1.0 / j;
  return PiecewiseFn::affine({-1.0, 1.0}, {-1.0, -w, w, 1.0}, {b0, b0, b1}, {0.0, slope, 0.0});
}

struct BlowupBracket {
  int j = 1;
  double lower = 0.0;
  std::optional<double> upper;
  std::optional<double> log_lower;
};

inline BlowupBracket blowup_bracket(int j, double s, double p, double b0, double b1) {
  if (j < 1) throw UsageError("bracket needs j >= 1");
  const SobolevParams params(s, p);
  const double dp = std::pow(std::abs(b1 - b0), p);
  BlowupBracket br;
  br.j = j;
  switch (params.regime()) {
    case Regime::Sub: {
      const double sp = params.sp();
      const double denom = sp * (1.0 - sp);
      const double js = std::pow(static_cast<double>(j), sp);
      br.lower = 2.0 * (1.0 - 1.0 / j) * js * (1.0 - std::pow(2.0, -sp)) * dp / denom;
      br.upper = 2.0 * js * dp / denom;
      break;
    }
    case Regime::Critical: {
      const double jd = j;
      br.log_lower = 2.0 * dp * std::log((jd + 1.0) * (jd + 1.0) / (4.0 * jd));
      br.lower = *br.log_lower;
      break;
    }
    default:
      throw RegimeError("blow-up bracket needs sp <= 1");
  }
  return br;
}

namespace detail {

constexpr double kBracketSlack = 1e-10;

inline nlohmann::ordered_json counterex_config(std::span<const int> js, double s, double p, double b0, double b1,
                                               const OuterFn& f) {
  nlohmann::ordered_json c;
  c["s"] = s;
  c["p"] = p;
  c["b0"] = b0;
  c["b1"] = b1;
  c["f"] = f.name();
  c["j_list"] = std::vector<int>(js.begin(), js.end());
  return c;
}

inline void require_collapse(const OuterFn& f, double b0, double b1) {
  const double tol = 1e-12 * std::max({1.0, std::abs(f(b0)), std::abs(f(b1))});
  if (std::abs(f(b0) - f(b1)) > tol) throw UsageError("collapse needs f(b0) = f(b1), got f = " + f.name());
}

// Fit over the largest half of the sorted j values (at least 4 of them).
inline std::optional<RateFit> fit_largest_half(std::vector<std::pair<double, double>> pts, RateModel model) {
  std::erase_if(pts, [](const auto& pt) { return !(pt.second > 0.0) || !std::isfinite(pt.second); });
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 4) return std::nullopt;
  const std::size_t keep = std::max<std::size_t>(4, (pts.size() + 1) / 2);
  std::vector<std::pair<double, double>> tail(pts.end() - static_cast<std::ptrdiff_t>(keep), pts.end());
  return fit_rate(tail, model);
}

}  // namespace detail

// Columns: j, seminorm, lower, upper, composed_seminorm. A row passes when the
// exact seminorm sits inside the bracket and f∘u_j is constant with seminorm 0.
inline VerificationReport verify_prop41(std::span<const int> js, double s, double p, double b0, double b1,
                                        std::optional<OuterFn> outer = std::nullopt, unsigned threads = 1) {
  const SobolevParams params(s, p);
  if (params.regime() != Regime::Sub) throw RegimeError("Prop41 check needs sp < 1");
  const OuterFn f = outer ? *outer : OuterFn::fold(b0, b1);
  detail::require_collapse(f, b0, b1);

  VerificationReport rep;
  rep.scenario = "Prop41";
  rep.config = detail::counterex_config(js, s, p, b0, b1, f);
  rep.columns = {"j", "seminorm", "lower", "upper", "composed_seminorm"};

  struct Out {
    std::vector<double> values;
    bool pass;
  };
  std::vector<Out> out(js.size());
  parallel_for(js.size(), threads, [&](std::size_t n) {
    const int j = js[n];
    const auto u = square_wave(j, b0, b1);
    const auto br = blowup_bracket(j, s, p, b0, b1);
    const double v = gagliardo(u, params).value;
    const auto fu = compose(f, u);
    const double cv = gagliardo(fu, params).value;
    const double slack = detail::kBracketSlack * std::max(v, *br.upper);
    const bool pass = v >= br.lower - slack && v <= *br.upper + slack && fu.is_constant_function() && cv == 0.0;
    out[n] = {{static_cast<double>(j), v, br.lower, *br.upper, cv}, pass};
  });

  std::vector<std::pair<double, double>> pts;
  for (auto& o : out) {
    pts.emplace_back(o.values[0], o.values[1]);
    rep.add_row(std::move(o.values), o.pass);
  }
  rep.summary["sp"] = params.sp();
  if (auto fit = detail::fit_largest_half(pts, RateModel::PowerLaw)) {
    rep.summary["slope"] = fit->slope;
    rep.summary["r2"] = fit->r2;
    rep.summary["rate_ok"] = std::abs(fit->slope - params.sp()) <= 0.05 ? 1.0 : 0.0;
  }
  return rep;
}

// Columns: j, seminorm, log_lower, composed_seminorm. A row passes when the
// seminorm of u_j clears the logarithmic lower bound and f∘u_j is finite.
inline VerificationReport verify_prop42(std::span<const int> js, double s, double p, double b0, double b1,
                                        const OuterFn& f, unsigned threads = 1) {
  const SobolevParams params(s, p);
  if (params.regime() != Regime::Critical) throw RegimeError("Prop42 check needs sp = 1");
  detail::require_collapse(f, b0, b1);
  if (!f.lipschitz()) throw UsageError("Prop42 check needs a Lipschitz f, got " + f.name());

  VerificationReport rep;
  rep.scenario = "Prop42";
  rep.config = detail::counterex_config(js, s, p, b0, b1, f);
  rep.columns = {"j", "seminorm", "log_lower", "composed_seminorm"};

  struct Out {
    std::vector<double> values;
    double composed_err;
    bool pass;
  };
  std::vector<Out> out(js.size());
  parallel_for(js.size(), threads, [&](std::size_t n) {
    const int j = js[n];
    const auto u = ramp_rescale(j, b0, b1);
    const auto br = blowup_bracket(j, s, p, b0, b1);
    const auto r = gagliardo(u, params);
    const auto cr = gagliardo(compose(f, u), params);
    const bool pass = r.value + r.err_estimate >= *br.log_lower && cr.finite();
    out[n] = {{static_cast<double>(j), r.value, *br.log_lower, cr.value}, cr.err_estimate, pass};
  });

  // The composed seminorm equals an integral of a fixed profile over (-j, j)^2,
  // so it can only grow with j.
  std::vector<std::size_t> order(out.size());
  for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return out[a].values[0] < out[b].values[0]; });
  bool monotone = true;
  for (std::size_t n = 1; n < order.size(); ++n) {
    const auto& lo = out[order[n - 1]];
    const auto& hi = out[order[n]];
    if (hi.values[3] + hi.composed_err + lo.composed_err < lo.values[3]) monotone = false;
  }

  double cmax = 0.0, cmin = kInf, cmax8 = 0.0, cmin8 = kInf;
  std::vector<std::pair<double, double>> pts;
  for (auto& o : out) {
    const double j = o.values[0], v = o.values[1], cv = o.values[3];
    cmax = std::max(cmax, cv);
    cmin = std::min(cmin, cv);
    if (j >= 8) {
      cmax8 = std::max(cmax8, cv);
      cmin8 = std::min(cmin8, cv);
    }
    if (j >= 2) pts.emplace_back(j, v);
    rep.add_row(std::move(o.values), o.pass);
  }
  if (!monotone) ++rep.failures;
  rep.summary["composed_max"] = cmax;
  rep.summary["composed_min"] = cmin;
  if (cmin8 < kInf && cmin8 > 0.0) rep.summary["composed_ratio_j8"] = cmax8 / cmin8;
  rep.summary["composed_monotone"] = monotone ? 1.0 : 0.0;
  if (pts.size() >= 4) {
    const auto fit = fit_rate(pts, RateModel::Logarithmic);
    rep.summary["log_slope"] = fit.slope;
    rep.summary["log_r2"] = fit.r2;
  }
  return rep;
}

}  // namespace sobrev
