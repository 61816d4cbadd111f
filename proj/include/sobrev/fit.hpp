#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "sobrev/error.hpp"
#include "sobrev/numeric.hpp"

namespace sobrev {

enum class RateModel {
  PowerLaw,     // ln value against ln j
  Logarithmic,  // value against ln j
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares growth rate of (j, value) pairs.
inline RateFit fit_rate(std::span<const std::pair<double, double>> pairs, RateModel model = RateModel::PowerLaw) {
  if (pairs.size() < 4) throw FitError("rate fit needs at least 4 pairs");
  const double n = static_cast<double>(pairs.size());
  CompensatedSum sx, sy;
  for (const auto& [j, v] : pairs) {
    if (!(j > 0.0) || !(v > 0.0) || !std::isfinite(v)) throw FitError("rate fit needs positive finite values");
    sx += std::log(j);
    sy += model == RateModel::PowerLaw ? std::log(v) : v;
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (const auto& [j, v] : pairs) {
    const double dx = std::log(j) - mx;
    const double dy = (model == RateModel::PowerLaw ? std::log(v) : v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx.value() == 0.0) throw FitError("rate fit needs at least two distinct j");
  RateFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  const double ss_res = syy.value() - fit.slope * sxy.value();
  fit.r2 = syy.value() > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy.value() : 1.0;
  return fit;
}

}  // namespace sobrev
