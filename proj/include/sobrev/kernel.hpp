#pragma once

// Integrals of the singular kernel |y - x|^-(1 + sp) over pairs of cells.
//
// For piecewise-constant data the jump factor |u(y) - u(x)|^p comes out of
// the integral and the remaining kernel integral has a closed form through
// the second antiderivative G'' (t) = t^-(1 + sp). Affine-affine pairs are
// integrated numerically: touching cells go through a Duffy split that
// removes the corner singularity, separated cells through nested adaptive
// G7/K15 with geometric grading toward the near corner.

#include <cmath>
#include <utility>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/func1d.hpp"
#include "sobrev/numeric.hpp"

namespace sobrev {

struct CellPairIntegral {
  double value = 0.0;
  bool finite = true;
};

struct KernelOptions {
  double grading_ratio = 0.5;
  double abs_tol = 1e-15;
  double rel_tol = 1e-11;
  int max_panels = 4000;
};

// Restriction of an affine function to one cell.
struct AffinePiece {
  Interval cell;
  double left_value;
  double slope;

  double right_value() const noexcept { return left_value + slope * cell.length(); }
};

struct AffinePairResult {
  double value = 0.0;
  double error = 0.0;
  bool finite = true;
};

namespace detail {

// G with G''(t) = t^-(1 + sp), normalised so that G(0) is finite for sp < 1.
// Linear terms cancel in the four-point combination, so the normalisation is
// free. Near sp = 1 the expm1 quotient is replaced by its series.
inline double second_antiderivative(double t, double sp) {
  const double eps = 1.0 - sp;
  if (t == 0.0) return eps > 0.0 ? 1.0 / (sp * eps) : kInf;
  const double lt = std::log(t);
  if (std::abs(eps) < 1e-9) {
    const double z = eps * lt;
    return -lt * (1.0 + z * (0.5 + z / 6.0)) / sp;
  }
  return -std::expm1(eps * lt) / (sp * eps);
}

inline void require_disjoint(const Interval& c1, const Interval& c2) {
  if (std::max(c1.a, c2.a) < std::min(c1.b, c2.b)) throw UsageError("cells overlap");
}

// Geometric breakpoints 0, gap, gap/r, gap/r^2, ... up to length.
inline std::vector<double> graded_breaks(double length, double gap, double ratio) {
  std::vector<double> pts{0.0};
  if (gap > 0.0 && gap < length) {
    for (double x = gap; x < length; x /= ratio) pts.push_back(x);
  }
  pts.push_back(length);
  return pts;
}

}  // namespace detail

// ∬_{c1 × c2} |y - x|^-(1 + sp) dy dx for cells with disjoint interiors.
// Touching cells diverge for sp >= 1 (finite = false).
inline CellPairIntegral cross_cell(const Interval& first, const Interval& second, double sp) {
  if (!(sp > 0.0)) throw DomainError("sp must be positive");
  detail::require_disjoint(first, second);
  const Interval& c1 = first.a <= second.a ? first : second;
  const Interval& c2 = first.a <= second.a ? second : first;
  const double gap = c2.a - c1.b;
  if (gap <= 0.0 && sp >= 1.0) return {kInf, false};

  if (c1.length() + c2.length() <= 1e-3 * gap) {
    // well separated: the integrand is analytic over a region much smaller
    // than its distance to the singularity, and the closed form would cancel
    auto inner = [&](double x) {
      return gauss_legendre8([&](double y) { return std::pow(y - x, -1.0 - sp); }, c2.a, c2.b);
    };
    return {gauss_legendre8(inner, c1.a, c1.b), true};
  }
  using detail::second_antiderivative;
  const double v = (second_antiderivative(c2.b - c1.a, sp) - second_antiderivative(c2.b - c1.b, sp)) -
                   (second_antiderivative(c2.a - c1.a, sp) - second_antiderivative(gap, sp));
  return {std::max(v, 0.0), true};
}

// ∬_{c × c} |slope|^p |y - x|^(p - 1 - sp) for an affine piece, s in (0, 1).
inline double same_cell_affine(const Interval& c, double slope, double s, double p) {
  const double q = p - SobolevParams(s, p).sp();
  if (!(q > 0.0)) throw UsageError("same-cell integral needs p - sp > 0");
  if (slope == 0.0) return 0.0;
  const double len = c.length();
  return 2.0 * std::pow(std::abs(slope), p) * std::pow(len, q + 1.0) / (q * (q + 1.0));
}

// ∬_{c1 × c2} |u(y) - u(x)|^p / |y - x|^(1 + sp) for u affine on each cell.
// Divergent (finite = false) for touching cells with a jump and sp >= 1.
// Throws ConvergenceError when the panel budget is exhausted.
inline AffinePairResult cross_cell_affine(const AffinePiece& first, const AffinePiece& second, double s, double p,
                                          const KernelOptions& opt = {}) {
  detail::require_disjoint(first.cell, second.cell);
  const AffinePiece& lhs = first.cell.a <= second.cell.a ? first : second;
  const AffinePiece& rhs = first.cell.a <= second.cell.a ? second : first;
  const double sp = SobolevParams(s, p).sp();
  const double q = p - sp;
  if (!(q > 0.0)) throw UsageError("affine pair integral needs p - sp > 0");

  const double len1 = lhs.cell.length();
  const double len2 = rhs.cell.length();
  const double gap = rhs.cell.a - lhs.cell.b;
  const double s1 = lhs.slope;
  const double s2 = rhs.slope;
  double jump = rhs.left_value - lhs.right_value();
  const double scale = std::max({1.0, std::abs(rhs.left_value), std::abs(lhs.right_value())});
  if (std::abs(jump) <= 1e-12 * scale) jump = 0.0;

  if (gap <= 0.0 && jump != 0.0 && sp >= 1.0) return {kInf, 0.0, false};
  if (s1 == 0.0 && s2 == 0.0) {
    const auto k = cross_cell(lhs.cell, rhs.cell, sp);
    return {std::pow(std::abs(jump), p) * k.value, 0.0, k.finite};
  }

  QuadOptions inner_opt{opt.abs_tol * 1e-2, opt.rel_tol * 1e-2, opt.max_panels};
  QuadOptions outer_opt{opt.abs_tol, opt.rel_tol, opt.max_panels};
  bool inner_ok = true;

  QuadResult total;
  if (gap <= 0.0) {
    // x = m - len1 * a, y = m + len2 * a * t (and the mirrored triangle);
    // then u(y) - u(x) = jump + a * c(t) and |y - x| = a * d(t).
    const double m = 1.0 / (1.0 - sp);
    auto inner = [&](double c) -> double {
      if (jump == 0.0) return std::pow(std::abs(c), p) / (q + 1.0);
      // ∫_0^1 |jump + a c|^p a^-sp da, singular at a = 0 and kinked at a*
      const double astar = c != 0.0 ? -jump / c : -1.0;
      const double a1 = (astar > 0.0 && astar < 1.0) ? astar : 1.0;
      // a = a1 v^m turns a^-sp da into a smooth measure
      auto near = [&](double v) { return std::pow(std::abs(jump + a1 * c * std::pow(v, m)), p); };
      auto r1 = integrate(near, 0.0, 1.0, inner_opt);
      inner_ok = inner_ok && r1.converged;
      double val = std::pow(a1, 1.0 - sp) * m * r1.value;
      if (a1 < 1.0) {
        auto far = [&](double a) { return std::pow(std::abs(jump + a * c), p) * std::pow(a, -sp); };
        auto r2 = integrate(far, a1, 1.0, inner_opt);
        inner_ok = inner_ok && r2.converged;
        val += r2.value;
      }
      return val;
    };
    auto tri1 = [&](double t) {
      const double d = len1 + len2 * t;
      return len1 * len2 * inner(s1 * len1 + s2 * len2 * t) / std::pow(d, 1.0 + sp);
    };
    auto tri2 = [&](double t) {
      const double d = len1 * t + len2;
      return len1 * len2 * inner(s1 * len1 * t + s2 * len2) / std::pow(d, 1.0 + sp);
    };
    // split the t-range where c(t) changes sign
    auto breaks_at = [](double num, double den) {
      std::vector<double> b{0.0, 1.0};
      if (den != 0.0) {
        const double t0 = -num / den;
        if (t0 > 0.0 && t0 < 1.0) b = {0.0, t0, 1.0};
      }
      return b;
    };
    const auto b1 = breaks_at(s1 * len1, s2 * len2);
    const auto b2 = breaks_at(s2 * len2, s1 * len1);
    const auto q1 = integrate(tri1, std::span<const double>(b1), outer_opt);
    const auto q2 = integrate(tri2, std::span<const double>(b2), outer_opt);
    total.value = q1.value + q2.value;
    total.error = q1.error + q2.error;
    total.converged = q1.converged && q2.converged;
  } else {
    // x = lhs.b - xi, y = rhs.a + eta
    const auto xi_breaks = detail::graded_breaks(len1, gap, opt.grading_ratio);
    auto outer = [&](double xi) {
      const double base = jump + s1 * xi;
      std::vector<double> eta_breaks = detail::graded_breaks(len2, xi + gap, opt.grading_ratio);
      if (s2 != 0.0) {
        const double kink = -base / s2;
        if (kink > 0.0 && kink < len2) {
          eta_breaks.push_back(kink);
          sort_unique(eta_breaks, 0.0);
        }
      }
      auto f = [&](double eta) {
        return std::pow(std::abs(base + s2 * eta), p) * std::pow(xi + eta + gap, -1.0 - sp);
      };
      auto r = integrate(f, std::span<const double>(eta_breaks), inner_opt);
      inner_ok = inner_ok && r.converged;
      return r.value;
    };
    total = integrate(outer, std::span<const double>(xi_breaks), outer_opt);
  }
  const double err = total.error + inner_opt.rel_tol * std::abs(total.value);
  if (!total.converged || !inner_ok) {
    throw ConvergenceError("affine cell-pair quadrature did not reach tolerance", total.value, err);
  }
  return {total.value, err, true};
}

// Interval form: cells given as intervals inside cells of u, absolute
// tolerance `tol`.
inline AffinePairResult cross_cell_affine(const Interval& c1, const Interval& c2, const PiecewiseFn& u, double s,
                                          double p, double tol) {
  auto piece = [&u](const Interval& c) {
    const std::size_t i = u.locate(c.midpoint());
    const double slack = u.merge_tolerance();
    if (c.a < u.cell(i).a - slack || c.b > u.cell(i).b + slack) {
      throw UsageError("interval is not contained in a single cell");
    }
    return AffinePiece{c, u.eval_in_cell(i, c.a), u.slope(i)};
  };
  KernelOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = 0.0;
  return cross_cell_affine(piece(c1), piece(c2), s, p, opt);
}

}  // namespace sobrev
