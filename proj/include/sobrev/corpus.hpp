#pragma once

#include <cstdint>
#include <vector>

#include "sobrev/func1d.hpp"
#include "sobrev/rng.hpp"

namespace sobrev {

// Continuous interpolant on a uniform grid of N cells, N in [min_cells,
// max_cells], node values uniform in [-1, 1].
inline PiecewiseFn random_continuous_affine(CounterRng& rng, int min_cells = 4, int max_cells = 32,
                                            Interval dom = {0.0, 1.0}) {
  const int n = rng.integer(min_cells, max_cells);
  std::vector<double> breaks(n + 1), vals(n + 1);
  for (int k = 0; k <= n; ++k) {
    breaks[k] = dom.a + dom.length() * k / n;
    vals[k] = rng.uniform(-1.0, 1.0);
  }
  breaks[n] = dom.b;
  return PiecewiseFn::interpolant(dom, std::move(breaks), vals);
}

// Same law, conditioned on taking both signs: one node is reflected if needed.
inline PiecewiseFn random_sign_changing(CounterRng& rng, int min_cells = 4, int max_cells = 32,
                                        Interval dom = {0.0, 1.0}) {
  const int n = rng.integer(min_cells, max_cells);
  std::vector<double> breaks(n + 1), vals(n + 1);
  for (int k = 0; k <= n; ++k) {
    breaks[k] = dom.a + dom.length() * k / n;
    vals[k] = rng.uniform(-1.0, 1.0);
  }
  breaks[n] = dom.b;
  const double lo = *std::min_element(vals.begin(), vals.end());
  const double hi = *std::max_element(vals.begin(), vals.end());
  const int k = rng.integer(0, n);
  if (!(lo < 0.0)) vals[k] = -std::max(vals[k], 0.25);
  else if (!(hi > 0.0)) vals[k] = std::max(-vals[k], 0.25);
  return PiecewiseFn::interpolant(dom, std::move(breaks), vals);
}

// Constant, continuous affine or discontinuous affine on 2..8 jittered cells.
inline PiecewiseFn random_mixed(CounterRng& rng, Interval dom = {0.0, 1.0}) {
  const int kind = rng.integer(0, 2);
  const int n = rng.integer(2, 8);
  std::vector<double> breaks(n + 1);
  for (int k = 0; k <= n; ++k) breaks[k] = static_cast<double>(k) / n;
  for (int k = 1; k < n; ++k) breaks[k] += rng.uniform(-0.3, 0.3) / n;
  for (auto& t : breaks) t = dom.a + dom.length() * t;
  breaks[n] = dom.b;
  if (kind == 1) {
    std::vector<double> vals(n + 1);
    for (auto& v : vals) v = rng.uniform(-1.0, 1.0);
    return PiecewiseFn::interpolant(dom, std::move(breaks), vals);
  }
  std::vector<double> left(n), slope(n, 0.0);
  for (int k = 0; k < n; ++k) {
    left[k] = rng.uniform(-1.0, 1.0);
    if (kind == 2) slope[k] = rng.uniform(-2.0, 2.0);
  }
  if (kind == 0) return PiecewiseFn::constant(dom, std::move(breaks), std::move(left));
  return PiecewiseFn::affine(dom, std::move(breaks), std::move(left), std::move(slope));
}

}  // namespace sobrev
