#pragma once

// Essential oscillation over segments and the oscillation seminorm
//
//   ∬ (essosc_{[x,y]} u)^p / |y - x|^(1 + sp) dy dx,
//
// which dominates the Gagliardo seminorm pointwise and, for sp > 1, is
// bounded by a constant multiple of it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/func1d.hpp"
#include "sobrev/numeric.hpp"
#include "sobrev/seminorm.hpp"

namespace sobrev {

// esssup - essinf of u over [min(x,y), max(x,y)], from cell data. Only cells
// meeting the segment in positive length count.
inline double essosc_segment(const PiecewiseFn& u, double x, double y) {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  if (!(lo >= u.domain().a && hi <= u.domain().b)) throw DomainError("segment outside the function's domain");
  if (!(hi > lo)) return 0.0;
  double mx = -kInf, mn = kInf;
  for (std::size_t i = u.locate(lo); i < u.cells(); ++i) {
    const Interval c = u.cell(i);
    if (c.a >= hi) break;
    const double l = std::max(lo, c.a);
    const double r = std::min(hi, c.b);
    if (!(r > l)) continue;
    const double vl = u.eval_in_cell(i, l);
    const double vr = u.eval_in_cell(i, r);
    mx = std::max({mx, vl, vr});
    mn = std::min({mn, vl, vr});
  }
  return mx - mn;
}

namespace detail {

// A line v0 + slope (x - x0) on a fixed piece.
struct Line {
  double v0;
  double slope;
};

// ∫_{x0}^{x1} (max_k line_k - min_k line_k)^p dx, exact: the envelope gap is
// linear between pairwise crossings.
inline double envelope_gap_integral(std::span<const Line> lines, double x0, double x1, double p) {
  const double len = x1 - x0;
  std::vector<double> cuts{0.0, len};
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const double ds = lines[a].slope - lines[b].slope;
      if (ds == 0.0) continue;
      const double d = (lines[b].v0 - lines[a].v0) / ds;
      if (d > 0.0 && d < len) cuts.push_back(d);
    }
  }
  sort_unique(cuts, 0.0);
  auto gap = [&](double d) {
    double mx = -kInf, mn = kInf;
    for (const auto& l : lines) {
      const double v = l.v0 + l.slope * d;
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    return mx - mn;
  };
  CompensatedSum sum;
  double g0 = gap(cuts[0]);
  for (std::size_t n = 0; n + 1 < cuts.size(); ++n) {
    const double g1 = gap(cuts[n + 1]);
    sum += (cuts[n + 1] - cuts[n]) * mean_abs_pow(g0, g1, p);
    g0 = g1;
  }
  return sum.value();
}

// Range max/min over whole cells in O(1) (sparse tables).
class CellRangeTable {
 public:
  explicit CellRangeTable(const PiecewiseFn& u) {
    const std::size_t n = u.cells();
    std::vector<double> mx(n), mn(n);
    for (std::size_t i = 0; i < n; ++i) {
      mx[i] = u.cell_max(i);
      mn[i] = u.cell_min(i);
    }
    max_.push_back(std::move(mx));
    min_.push_back(std::move(mn));
    for (std::size_t w = 1; (std::size_t{1} << w) <= n; ++w) {
      const std::size_t half = std::size_t{1} << (w - 1);
      const std::size_t count = n - (std::size_t{1} << w) + 1;
      std::vector<double> a(count), b(count);
      for (std::size_t i = 0; i < count; ++i) {
        a[i] = std::max(max_[w - 1][i], max_[w - 1][i + half]);
        b[i] = std::min(min_[w - 1][i], min_[w - 1][i + half]);
      }
      max_.push_back(std::move(a));
      min_.push_back(std::move(b));
    }
  }

  // Max and min over cells first..last inclusive.
  std::pair<double, double> query(std::size_t first, std::size_t last) const {
    const std::size_t len = last - first + 1;
    std::size_t w = 0;
    while ((std::size_t{2} << w) <= len) ++w;
    const std::size_t second = last + 1 - (std::size_t{1} << w);
    return {std::max(max_[w][first], max_[w][second]), std::min(min_[w][first], min_[w][second])};
  }

 private:
  std::vector<std::vector<double>> max_;
  std::vector<std::vector<double>> min_;
};

}  // namespace detail

struct OscOptions {
  double tol = 1e-9;
  // Permit sp <= 1 (the integral then diverges for any jump).
  bool allow_any_regime = false;
  // Skip the monotone shortcut and always integrate.
  bool force_quadrature = false;
};

struct OscIntegral {
  double value = 0.0;
  double err_estimate = 0.0;
  // Monotone u: essosc equals |u(y) - u(x)|, so the Gagliardo value was used.
  bool monotone_reduction = false;
};

inline OscIntegral osc_seminorm(const PiecewiseFn& u, const SobolevParams& params, const OscOptions& opt = {}) {
  if (params.regime() == Regime::FirstOrder) throw RegimeError("oscillation seminorm needs s < 1");
  if (params.regime() != Regime::Super && !opt.allow_any_regime) {
    throw RegimeError("oscillation seminorm is only used for sp > 1");
  }
  OscIntegral out;
  if (u.is_constant_function()) return out;
  if (!opt.force_quadrature && u.monotonicity() != 0) {
    const auto g = gagliardo(u, params);
    out.value = g.value;
    out.err_estimate = g.err_estimate;
    out.monotone_reduction = true;
    return out;
  }

  const detail::HStructure hs(u, params);
  const detail::CellRangeTable table(u);
  const double p = params.p();
  const double sp = params.sp();
  const double q = p - sp;
  const std::size_t cells = u.cells();

  // x = t_i - theta h straddles breakpoint i; values relative to u(t_i-)
  auto straddle = [&](std::size_t i, double h, double jump) {
    const std::array<detail::Line, 4> lines = {detail::Line{0.0, -u.slope(i - 1) * h}, detail::Line{0.0, 0.0},
                                               detail::Line{jump, 0.0},
                                               detail::Line{jump + u.slope(i) * h, -u.slope(i) * h}};
    return detail::envelope_gap_integral(lines, 0.0, 1.0, p);
  };

  auto g_small = [&](double h) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < cells; ++i) {
      if (u.slope(i) != 0.0) sum += std::pow(std::abs(u.slope(i)) * h, p) * (u.cell_length(i) - h);
    }
    for (std::size_t i = 1; i < cells; ++i) sum += h * straddle(i, h, hs.jumps[i]);
    return sum.value();
  };

  auto g_large = [&](double h) {
    CompensatedSum sum;
    hs.for_each_piece(h, [&](double x0, double x1, std::size_t i, std::size_t k) {
      std::vector<detail::Line> lines = {{u.eval_in_cell(i, x0), u.slope(i)},
                                         {u.eval_in_cell(k, x0 + h), u.slope(k)}};
      if (k > i) {
        lines.push_back({u.right_value(i), 0.0});
        lines.push_back({u.left_value(k), 0.0});
      }
      if (k > i + 1) {
        const auto [mx, mn] = table.query(i + 1, k - 1);
        lines.push_back({mx, 0.0});
        lines.push_back({mn, 0.0});
      }
      sum += detail::envelope_gap_integral(lines, x0, x1, p);
    });
    return sum.value();
  };

  auto tail = [&](double delta) -> std::pair<double, double> {
    CompensatedSum value, error;
    for (std::size_t i = 0; i < cells; ++i) {
      const double sl = std::abs(u.slope(i));
      if (sl == 0.0) continue;
      value += std::pow(sl, p) *
               (u.cell_length(i) * std::pow(delta, q) / q - std::pow(delta, q + 1.0) / (q + 1.0));
    }
    for (std::size_t i = 1; i < cells; ++i) {
      const double j = hs.jumps[i];
      if (j == 0.0) {
        // the straddle oscillation is exactly linear in h
        value += straddle(i, 1.0, 0.0) * std::pow(delta, q + 1.0) / (q + 1.0);
        continue;
      }
      if (sp >= 1.0) return {kInf, kInf};
      value += std::pow(std::abs(j), p) * std::pow(delta, 1.0 - sp) / (1.0 - sp);
      const double slope = std::abs(u.slope(i)) + std::abs(u.slope(i - 1));
      error += p * std::pow(std::abs(j), p - 1.0) * slope * std::pow(delta, 2.0 - sp) / (2.0 - sp);
    }
    return {value.value(), error.value()};
  };

  const auto r = detail::integrate_in_h(hs, g_small, g_large, tail, opt.tol);
  out.value = r.divergent ? kInf : r.value;
  out.err_estimate = r.divergent ? 0.0 : r.error;
  if (!r.divergent && !r.converged) {
    throw ConvergenceError("oscillation quadrature did not reach tolerance", out.value, out.err_estimate);
  }
  return out;
}

struct OscillationResult {
  double osc_seminorm = 0.0;
  double base_seminorm = 0.0;
  double ratio = 1.0;
};

// Both sides of the reverse oscillation inequality; `ratio` is the smallest
// constant that works for this u.
inline OscillationResult reverse_oscillation_ratio(const PiecewiseFn& u, const SobolevParams& params,
                                                   const OscOptions& opt = {}) {
  if (u.is_constant_function()) throw UsageError("reverse oscillation ratio needs a non-constant u");
  OscillationResult out;
  out.osc_seminorm = osc_seminorm(u, params, opt).value;
  out.base_seminorm = gagliardo(u, params).value;
  out.ratio = out.osc_seminorm / out.base_seminorm;
  return out;
}

}  // namespace sobrev
