#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sobrev/rng.hpp"
#include "sobrev/seminorm.hpp"
#include "sobrev/superpose.hpp"

namespace sobrev {

namespace detail {

inline void require_continuous_affine(const PiecewiseFn& u, const char* what) {
  if (!u.is_continuous()) throw NoWeakDerivative(std::string(what) + ": u has a jump");
}

}  // namespace detail

// Slopes of a continuous piecewise-affine u as a Constant-kind function.
inline PiecewiseFn weak_derivative(const PiecewiseFn& u) {
  detail::require_continuous_affine(u, "weak derivative");
  const auto br = u.breakpoints();
  const auto sl = u.slopes();
  return PiecewiseFn::constant(u.domain(), {br.begin(), br.end()}, {sl.begin(), sl.end()});
}

// D|u| = sign(u) Du at random points away from breakpoints and zeros of u.
inline bool check_abs_chain_rule(const PiecewiseFn& u, int samples, std::uint64_t seed = 0) {
  detail::require_continuous_affine(u, "chain rule check");
  const auto du = weak_derivative(u);
  const auto v = compose(OuterFn::abs(), u);
  const auto dv = weak_derivative(v);
  const Interval dom = u.domain();
  const double gap = 1e-9 * dom.length();
  const double zero = 1e-12 * std::max(1.0, u.value_scale());

  auto near_break = [gap](const PiecewiseFn& w, double x) {
    const auto br = w.breakpoints();
    auto it = std::lower_bound(br.begin(), br.end(), x);
    if (it != br.end() && *it - x < gap) return true;
    return it != br.begin() && x - *(it - 1) < gap;
  };

  CounterRng rng(seed, 0);
  int done = 0;
  for (int tries = 0; done < samples && tries < 100 * samples + 100; ++tries) {
    const double x = rng.uniform(dom.a, dom.b);
    const double ux = u(x);
    if (near_break(u, x) || near_break(v, x) || std::abs(ux) <= zero) continue;
    const double lhs = dv(x);
    const double rhs = (ux > 0.0 ? 1.0 : -1.0) * du(x);
    if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs))) return false;
    if (std::abs(lhs) > std::abs(du(x)) * (1.0 + 1e-12)) return false;
    ++done;
  }
  // u identically zero leaves nothing to sample; both sides vanish.
  return true;
}

// (energy of |u|, energy of u).
inline std::pair<double, double> check_energy_identity(const PiecewiseFn& u, double p) {
  detail::require_continuous_affine(u, "energy identity");
  return {first_order_energy(compose(OuterFn::abs(), u), p), first_order_energy(u, p)};
}

struct PointwiseCheck {
  double x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  bool flagged = false;  // limsup factor infinite, inequality holds vacuously
};

// |u'(x)| <= |(f∘u)'(x)| * limsup factor of f at u(x), per grid point.
inline std::vector<PointwiseCheck> check_theorem21(const PiecewiseFn& u, const OuterFn& f, std::span<const double> grid) {
  detail::require_continuous_affine(u, "pointwise check");
  std::optional<PiecewiseFn> fu;
  if (f.piecewise_affine()) fu = compose(f, u);

  std::vector<PointwiseCheck> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const double ux = u(x);
    const double du = u.slope(u.locate(x));
    const double dfu = fu ? fu->slope(fu->locate(x)) : f.slope_right(ux) * du;
    const auto L = limsup_factor(f, ux);

    PointwiseCheck c;
    c.x = x;
    c.lhs = std::abs(du);
    if (std::isinf(L.value)) {
      c.rhs = kInf;
      c.flagged = true;
    } else {
      c.rhs = std::abs(dfu) * L.value;
    }
    c.pass = c.lhs <= c.rhs * (1.0 + 1e-9);
    out.push_back(c);
  }
  return out;
}

}  // namespace sobrev
