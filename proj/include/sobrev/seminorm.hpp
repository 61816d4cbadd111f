#pragma once

// Gagliardo seminorm
//
//   [u]^p = ∬_{Ω×Ω} |u(y) - u(x)|^p / |y - x|^(1 + sp) dy dx
//
// assembled two independent ways: cell-pair sums of kernel primitives
// (gagliardo) and a global quadrature in (x, h = y - x) coordinates
// (gagliardo_quad). Plus the first-order energy ∫ |u'|^p.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/func1d.hpp"
#include "sobrev/kernel.hpp"
#include "sobrev/numeric.hpp"

namespace sobrev {

enum class Method { Exact, SemiAnalytic, Quadrature };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::SemiAnalytic: return "semi-analytic";
    case Method::Quadrature: return "quadrature";
  }
  return "?";
}

// Pair of cells whose interaction integral is infinite.
struct DivergenceWitness {
  std::size_t first_cell;
  std::size_t second_cell;
};

struct SeminormResult {
  double value = 0.0;
  Method method = Method::Exact;
  double err_estimate = 0.0;
  SobolevParams params{0.5, 1.0};
  std::optional<DivergenceWitness> witness;
  // Set by the quadrature path when graded levels stop decaying.
  bool suspected_divergence = false;

  bool finite() const noexcept { return std::isfinite(value); }
};

struct GagliardoOptions {
  double rel_tol = 1e-10;
  KernelOptions kernel{};
};

namespace detail {

inline void require_fractional(const SobolevParams& params) {
  if (params.regime() == Regime::FirstOrder) {
    throw RegimeError("s = 1 has no Gagliardo seminorm; use first_order_energy");
  }
}

inline SeminormResult divergent(const SobolevParams& params, Method m, std::size_t i, std::size_t k) {
  SeminormResult r;
  r.value = kInf;
  r.method = m;
  r.params = params;
  r.witness = DivergenceWitness{i, k};
  return r;
}

// Pair sum for piecewise-constant data; exact up to rounding.
inline SeminormResult gagliardo_constant(const PiecewiseFn& u, const SobolevParams& params) {
  const double sp = params.sp();
  const double p = params.p();
  CompensatedSum sum;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    for (std::size_t k = i + 1; k < u.cells(); ++k) {
      const double diff = std::abs(u.left_value(k) - u.left_value(i));
      if (diff == 0.0) continue;
      const auto kern = cross_cell(u.cell(i), u.cell(k), sp);
      if (!kern.finite) return divergent(params, Method::Exact, i, k);
      sum += 2.0 * std::pow(diff, p) * kern.value;
    }
  }
  SeminormResult r;
  r.value = sum.value();
  r.method = Method::Exact;
  r.params = params;
  return r;
}

}  // namespace detail

// Exact (Constant kind) or semi-analytic (Affine kind) seminorm. Returns +inf
// with a witness when some pair of cells diverges.
inline SeminormResult gagliardo(const PiecewiseFn& u, const SobolevParams& params, const GagliardoOptions& opt = {}) {
  detail::require_fractional(params);
  if (u.kind() == FnKind::Constant || u.has_zero_slopes()) return detail::gagliardo_constant(u, params);

  const double s = params.s();
  const double p = params.p();
  const double sp = params.sp();
  KernelOptions kopt = opt.kernel;
  kopt.rel_tol = opt.rel_tol;

  auto piece = [&u](std::size_t i) { return AffinePiece{u.cell(i), u.left_value(i), u.slope(i)}; };

  CompensatedSum value, error;
  bool converged = true;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    value += same_cell_affine(u.cell(i), u.slope(i), s, p);
  }
  for (std::size_t i = 0; i < u.cells(); ++i) {
    for (std::size_t k = i + 1; k < u.cells(); ++k) {
      if (u.slope(i) == 0.0 && u.slope(k) == 0.0) {
        const double diff = std::abs(u.left_value(k) - u.left_value(i));
        if (diff <= u.jump_tolerance()) continue;
        const auto kern = cross_cell(u.cell(i), u.cell(k), sp);
        if (!kern.finite) return detail::divergent(params, Method::SemiAnalytic, i, k);
        value += 2.0 * std::pow(diff, p) * kern.value;
        continue;
      }
      try {
        const auto r = cross_cell_affine(piece(i), piece(k), s, p, kopt);
        if (!r.finite) return detail::divergent(params, Method::SemiAnalytic, i, k);
        value += 2.0 * r.value;
        error += 2.0 * r.error;
      } catch (const ConvergenceError& e) {
        converged = false;
        value += 2.0 * e.best_estimate();
        error += 2.0 * e.error_estimate();
      }
    }
  }
  SeminormResult r;
  r.value = value.value();
  r.method = Method::SemiAnalytic;
  r.err_estimate = std::max(error.value(), 4.0 * std::numeric_limits<double>::epsilon() * r.value);
  r.params = params;
  if (!converged) throw ConvergenceError("seminorm quadrature did not reach tolerance", r.value, r.err_estimate);
  return r;
}

namespace detail {

// Shared machinery for integrals of the form
//   2 ∫_0^{|Ω|} h^-(1 + sp) g(h) dh,   g(h) = ∫ F(x, x + h)^p dx.
// Below the shortest cell length h only ever straddles one breakpoint, so g
// has a per-breakpoint structure (g_small); above it g is integrated piece by
// piece (g_large). The small-h range is covered by dyadic levels; the part
// below the last level uses the leading-order power law.
struct HStructure {
  const PiecewiseFn& u;
  double p;
  double sp;
  double shortest;
  std::vector<double> jumps;  // jumps[i] at breakpoint i, rounding noise zeroed

  HStructure(const PiecewiseFn& fn, const SobolevParams& params)
      : u(fn), p(params.p()), sp(params.sp()), shortest(fn.min_cell_length()), jumps(fn.cells(), 0.0) {
    for (std::size_t i = 1; i < u.cells(); ++i) {
      const double j = u.jump(i);
      jumps[i] = std::abs(j) <= u.jump_tolerance() ? 0.0 : j;
    }
  }

  // Offsets h where the piece structure of g_large changes.
  std::vector<double> h_breaks() const {
    const auto t = u.breakpoints();
    const double total = u.domain().length();
    std::vector<double> pts{shortest, total};
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t k = i + 1; k < t.size(); ++k) {
        const double d = t[k] - t[i];
        if (d > shortest && d < total) pts.push_back(d);
      }
    }
    sort_unique(pts, 1e-12 * total);
    return pts;
  }

  // x-pieces on which both x and x + h stay inside single cells.
  template <class Fn>
  void for_each_piece(double h, Fn&& fn) const {
    const auto t = u.breakpoints();
    const double a = u.domain().a;
    const double end = u.domain().b - h;
    std::vector<double> pts{a, end};
    for (double ti : t) {
      if (ti > a && ti < end) pts.push_back(ti);
      if (ti - h > a && ti - h < end) pts.push_back(ti - h);
    }
    sort_unique(pts, 0.0);
    for (std::size_t n = 0; n + 1 < pts.size(); ++n) {
      const double mid = 0.5 * (pts[n] + pts[n + 1]);
      fn(pts[n], pts[n + 1], u.locate(mid), u.locate(std::min(mid + h, u.domain().b)));
    }
  }
};

struct GradedOutcome {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  bool divergent = false;
};

// Integrates h^-(1+sp) g_small(h) over (0, shortest] by dyadic levels and a
// power-law tail supplied by the caller, then h^-(1+sp) g_large(h) over
// [shortest, |Ω|]. Doubles the result (both orderings of (x, y)).
template <class Small, class Large, class Tail>
GradedOutcome integrate_in_h(const HStructure& hs, Small&& g_small, Large&& g_large, Tail&& tail, double tol) {
  constexpr int kLevels = 40;
  const double sp = hs.sp;
  const auto hb = hs.h_breaks();
  const int pieces = kLevels + static_cast<int>(hb.size());
  QuadOptions qopt{tol * 1e-3 / pieces, tol * 1e-2, 4000};

  GradedOutcome out;
  CompensatedSum value, error;
  std::vector<double> levels;
  double hi = hs.shortest;
  for (int k = 0; k < kLevels; ++k) {
    const double lo = 0.5 * hi;
    auto r = integrate([&](double h) { return g_small(h) * std::pow(h, -1.0 - sp); }, lo, hi, qopt);
    out.converged = out.converged && r.converged;
    levels.push_back(r.value);
    value += r.value;
    error += r.error;
    hi = lo;
  }
  // Levels that stop shrinking mean the h -> 0 end is not integrable.
  const std::size_t n = levels.size();
  bool flat = levels[n - 1] > 0.0;
  for (std::size_t k = n - 4; k < n && flat; ++k) flat = levels[k] >= (1.0 - 1e-5) * levels[k - 1];
  const auto [tail_value, tail_error] = tail(hi);
  if (flat || !std::isfinite(tail_value)) {
    out.divergent = true;
    out.value = kInf;
    return out;
  }
  value += tail_value;
  error += tail_error;

  auto r = integrate([&](double h) { return g_large(h) * std::pow(h, -1.0 - sp); }, std::span<const double>(hb),
                     qopt);
  out.converged = out.converged && r.converged;
  value += r.value;
  error += r.error;
  out.value = 2.0 * value.value();
  out.error = 2.0 * error.value();
  return out;
}

}  // namespace detail

// Independent quadrature path in (x, h) coordinates. For every h the inner
// x-integral is exact (the difference u(x + h) - u(x) is affine on each
// piece); the h-integral is adaptive with dyadic grading toward h = 0.
inline SeminormResult gagliardo_quad(const PiecewiseFn& u, const SobolevParams& params, double tol = 1e-9) {
  detail::require_fractional(params);
  SeminormResult res;
  res.method = Method::Quadrature;
  res.params = params;
  if (u.is_constant_function()) return res;

  const detail::HStructure hs(u, params);
  const double p = params.p();
  const double sp = params.sp();
  const double q = p - sp;
  const std::size_t cells = u.cells();

  auto g_small = [&](double h) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < cells; ++i) {
      if (u.slope(i) != 0.0) sum += std::pow(std::abs(u.slope(i)) * h, p) * (u.cell_length(i) - h);
    }
    for (std::size_t i = 1; i < cells; ++i) {
      // x = t_i - theta h: difference runs from J + h s_right to J + h s_left
      const double j = hs.jumps[i];
      sum += h * mean_abs_pow(j + h * u.slope(i), j + h * u.slope(i - 1), p);
    }
    return sum.value();
  };

  auto g_large = [&](double h) {
    CompensatedSum sum;
    hs.for_each_piece(h, [&](double x0, double x1, std::size_t i, std::size_t k) {
      const double d0 = u.eval_in_cell(k, x0 + h) - u.eval_in_cell(i, x0);
      const double d1 = u.eval_in_cell(k, x1 + h) - u.eval_in_cell(i, x1);
      sum += (x1 - x0) * mean_abs_pow(d0, d1, p);
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
        value += mean_abs_pow(u.slope(i), u.slope(i - 1), p) * std::pow(delta, q + 1.0) / (q + 1.0);
        continue;
      }
      if (sp >= 1.0) return {kInf, kInf};
      value += std::pow(std::abs(j), p) * std::pow(delta, 1.0 - sp) / (1.0 - sp);
      const double slope = std::max(std::abs(u.slope(i)), std::abs(u.slope(i - 1)));
      error += p * std::pow(std::abs(j), p - 1.0) * slope * std::pow(delta, 2.0 - sp) / (2.0 - sp);
    }
    return {value.value(), error.value()};
  };

  const auto out = detail::integrate_in_h(hs, g_small, g_large, tail, tol);
  if (out.divergent) {
    res.value = kInf;
    res.suspected_divergence = true;
    return res;
  }
  res.value = out.value;
  res.err_estimate = out.error;
  if (!out.converged) throw ConvergenceError("seminorm quadrature did not reach tolerance", res.value, res.err_estimate);
  return res;
}

// ∫_Ω |u'|^p. +inf when u has a jump (no weak derivative on Ω).
inline double first_order_energy(const PiecewiseFn& u, double p) {
  if (!(p >= 1.0)) throw DomainError("p must lie in [1, inf)");
  if (u.kind() == FnKind::Constant || u.has_zero_slopes()) {
    for (std::size_t i = 1; i < u.cells(); ++i) {
      if (std::abs(u.jump(i)) > u.jump_tolerance()) return kInf;
    }
    return 0.0;
  }
  if (!u.is_continuous()) return kInf;
  CompensatedSum sum;
  for (std::size_t i = 0; i < u.cells(); ++i) sum += std::pow(std::abs(u.slope(i)), p) * u.cell_length(i);
  return sum.value();
}

}  // namespace sobrev
