#pragma once

// Scalar piecewise functions on a bounded interval: the universal input
// object of every seminorm computation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/numeric.hpp"

namespace sobrev {

struct Interval {
  double a;
  double b;

  Interval(double left, double right) : a(left), b(right) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
      throw DomainError("interval needs finite endpoints with a < b");
    }
  }

  double length() const noexcept { return b - a; }
  double midpoint() const noexcept { return 0.5 * (a + b); }
  bool contains(double x) const noexcept { return x >= a && x <= b; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Regime { Sub, Critical, Super, FirstOrder };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Sub: return "sub";
    case Regime::Critical: return "critical";
    case Regime::Super: return "super";
    case Regime::FirstOrder: return "first-order";
  }
  return "?";
}

// Smoothness s in (0, 1] and integrability p >= 1. sp within 1e-12 of 1 is
// classified Critical and sp() then returns exactly 1.
class SobolevParams {
 public:
  SobolevParams(double s, double p) : s_(s), p_(p) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("s must lie in (0, 1]");
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must lie in [1, inf)");
    const double sp = s * p;
    if (s == 1.0) {
      regime_ = Regime::FirstOrder;
    } else if (std::abs(sp - 1.0) <= 1e-12) {
      regime_ = Regime::Critical;
    } else {
      regime_ = sp < 1.0 ? Regime::Sub : Regime::Super;
    }
  }

  double s() const noexcept { return s_; }
  double p() const noexcept { return p_; }
  Regime regime() const noexcept { return regime_; }
  double sp() const noexcept { return regime_ == Regime::Critical ? 1.0 : s_ * p_; }

  friend bool operator==(const SobolevParams&, const SobolevParams&) = default;

 private:
  double s_;
  double p_;
  Regime regime_;
};

// Closed interval [lo, hi]; lo == hi encodes an isolated point.
struct ClosedRange {
  double lo;
  double hi;
  double diameter() const noexcept { return hi - lo; }
  friend bool operator==(const ClosedRange&, const ClosedRange&) = default;
};

// Finite union of disjoint closed intervals, sorted. Components closer than
// the merge tolerance are joined.
class RangeSet {
 public:
  RangeSet() = default;

  static RangeSet from_pieces(std::vector<ClosedRange> pieces, double merge_tol = 0.0) {
    std::sort(pieces.begin(), pieces.end(),
              [](const ClosedRange& x, const ClosedRange& y) { return x.lo < y.lo; });
    RangeSet out;
    for (const auto& r : pieces) {
      if (!out.parts_.empty() && r.lo <= out.parts_.back().hi + merge_tol) {
        out.parts_.back().hi = std::max(out.parts_.back().hi, r.hi);
      } else {
        out.parts_.push_back(r);
      }
    }
    return out;
  }

  std::span<const ClosedRange> components() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }

  // True when every component is a single point.
  bool totally_disconnected() const noexcept {
    return std::all_of(parts_.begin(), parts_.end(),
                       [](const ClosedRange& r) { return r.hi <= r.lo; });
  }

  bool contains(double y, double tol = 0.0) const noexcept {
    return std::any_of(parts_.begin(), parts_.end(), [&](const ClosedRange& r) {
      return y >= r.lo - tol && y <= r.hi + tol;
    });
  }

  double min() const { return parts_.front().lo; }
  double max() const { return parts_.back().hi; }

 private:
  std::vector<ClosedRange> parts_;
};

enum class FnKind { Constant, Affine };

// u(x) = left_value[i] + slope[i] * (x - t_i) on cell i = [t_i, t_{i+1}).
// Constant kind stores zero slopes. Jumps across breakpoints are allowed.
class PiecewiseFn {
 public:
  static PiecewiseFn constant(Interval domain, std::vector<double> breaks, std::vector<double> values) {
    std::vector<double> slopes(values.size(), 0.0);
    return PiecewiseFn(domain, std::move(breaks), FnKind::Constant, std::move(values), std::move(slopes));
  }

  static PiecewiseFn affine(Interval domain, std::vector<double> breaks, std::vector<double> left_values,
                            std::vector<double> slopes) {
    return PiecewiseFn(domain, std::move(breaks), FnKind::Affine, std::move(left_values), std::move(slopes));
  }

  static PiecewiseFn uniform_value(Interval domain, double c) {
    return constant(domain, {domain.a, domain.b}, {c});
  }

  // Continuous piecewise-affine interpolant of (breaks[i], node_values[i]).
  static PiecewiseFn interpolant(Interval domain, std::vector<double> breaks, std::span<const double> node_values) {
    if (node_values.size() != breaks.size()) throw UsageError("interpolant needs one value per breakpoint");
    std::vector<double> left(breaks.size() - 1), slope(breaks.size() - 1);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      left[i] = node_values[i];
      slope[i] = (node_values[i + 1] - node_values[i]) / (breaks[i + 1] - breaks[i]);
    }
    return affine(domain, std::move(breaks), std::move(left), std::move(slope));
  }

  const Interval& domain() const noexcept { return domain_; }
  FnKind kind() const noexcept { return kind_; }
  std::size_t cells() const noexcept { return left_.size(); }
  std::span<const double> breakpoints() const noexcept { return breaks_; }
  std::span<const double> left_values() const noexcept { return left_; }
  std::span<const double> slopes() const noexcept { return slope_; }

  Interval cell(std::size_t i) const { return {breaks_[i], breaks_[i + 1]}; }
  double cell_length(std::size_t i) const { return breaks_[i + 1] - breaks_[i]; }
  double left_value(std::size_t i) const { return left_[i]; }
  double slope(std::size_t i) const { return slope_[i]; }
  // Left limit at the right end of cell i.
  double right_value(std::size_t i) const { return left_[i] + slope_[i] * cell_length(i); }
  // u(t_i+) - u(t_i-) at interior breakpoint i (1 <= i < cells()).
  double jump(std::size_t i) const { return left_[i] - right_value(i - 1); }
  double cell_min(std::size_t i) const { return std::min(left_[i], right_value(i)); }
  double cell_max(std::size_t i) const { return std::max(left_[i], right_value(i)); }

  double min_cell_length() const {
    double m = kInf;
    for (std::size_t i = 0; i < cells(); ++i) m = std::min(m, cell_length(i));
    return m;
  }

  double value_scale() const {
    double m = 0.0;
    for (std::size_t i = 0; i < cells(); ++i) m = std::max({m, std::abs(left_[i]), std::abs(right_value(i))});
    return m;
  }

  // Cell index holding x, right-limit convention at breakpoints; x == b maps
  // to the last cell.
  std::size_t locate(double x) const {
    if (!(x >= domain_.a && x <= domain_.b)) throw DomainError("point outside the function's domain");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - breaks_.begin());
    idx = idx == 0 ? 0 : idx - 1;
    return std::min(idx, cells() - 1);
  }

  double eval_in_cell(std::size_t i, double x) const { return left_[i] + slope_[i] * (x - breaks_[i]); }

  double eval(double x) const { return eval_in_cell(locate(x), x); }
  double operator()(double x) const { return eval(x); }

  // Tolerance under which two breakpoints are considered the same point.
  double merge_tolerance() const noexcept { return 1e-12 * domain_.length(); }

  // Same function on the union of breakpoints. Points within
  // merge_tolerance() of an existing breakpoint are dropped.
  PiecewiseFn refine(std::span<const double> extra) const {
    const double tol = merge_tolerance();
    std::vector<double> sorted(extra.begin(), extra.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> accepted;
    for (double x : sorted) {
      if (!(x >= domain_.a && x <= domain_.b)) throw DomainError("refinement point outside the domain");
      auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
      if (it != breaks_.end() && *it - x <= tol) continue;
      if (it != breaks_.begin() && x - *(it - 1) <= tol) continue;
      if (!accepted.empty() && x - accepted.back() <= tol) continue;
      accepted.push_back(x);
    }
    std::vector<double> merged;
    merged.reserve(breaks_.size() + accepted.size());
    std::merge(breaks_.begin(), breaks_.end(), accepted.begin(), accepted.end(), std::back_inserter(merged));
    std::vector<double> left(merged.size() - 1), slope(merged.size() - 1);
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      const std::size_t i = locate(0.5 * (merged[k] + merged[k + 1]));
      left[k] = eval_in_cell(i, merged[k]);
      slope[k] = slope_[i];
    }
    if (kind_ == FnKind::Constant) return constant(domain_, std::move(merged), std::move(left));
    return affine(domain_, std::move(merged), std::move(left), std::move(slope));
  }

  // Essential range: cells have positive measure, so it is the union of the
  // closed per-cell value ranges.
  RangeSet range_exact() const {
    std::vector<ClosedRange> pieces;
    pieces.reserve(cells());
    for (std::size_t i = 0; i < cells(); ++i) pieces.push_back({cell_min(i), cell_max(i)});
    return RangeSet::from_pieces(std::move(pieces), jump_tolerance());
  }

  // Jumps smaller than this are rounding noise from construction.
  double jump_tolerance() const { return 1e-12 * std::max(1.0, value_scale()); }

  bool is_continuous() const {
    for (std::size_t i = 1; i < cells(); ++i) {
      if (std::abs(jump(i)) > jump_tolerance()) return false;
    }
    return true;
  }

  bool has_zero_slopes() const {
    return std::all_of(slope_.begin(), slope_.end(), [](double s) { return s == 0.0; });
  }

  bool is_constant_function() const {
    if (!has_zero_slopes()) return false;
    return std::all_of(left_.begin(), left_.end(), [&](double v) { return v == left_.front(); });
  }

  // Non-decreasing (+1), non-increasing (-1) or neither (0), jumps included.
  int monotonicity() const {
    bool up = true, down = true;
    for (std::size_t i = 0; i < cells(); ++i) {
      if (slope_[i] > 0.0) down = false;
      if (slope_[i] < 0.0) up = false;
      if (i > 0) {
        const double j = jump(i);
        if (j > jump_tolerance()) down = false;
        if (j < -jump_tolerance()) up = false;
      }
    }
    if (up) return 1;
    if (down) return -1;
    return 0;
  }

  // Canonical form: adjacent cells carrying the same affine piece are merged
  // and an all-zero-slope function becomes Constant kind.
  PiecewiseFn simplified() const {
    std::vector<double> br{breaks_.front()};
    std::vector<double> left, slope;
    for (std::size_t i = 0; i < cells(); ++i) {
      if (!left.empty() && slope.back() == slope_[i] && std::abs(jump(i)) <= jump_tolerance()) {
        br.back() = breaks_[i + 1];
        continue;
      }
      left.push_back(left_[i]);
      slope.push_back(slope_[i]);
      br.push_back(breaks_[i + 1]);
    }
    const bool flat = std::all_of(slope.begin(), slope.end(), [](double s) { return s == 0.0; });
    if (flat) return constant(domain_, std::move(br), std::move(left));
    return affine(domain_, std::move(br), std::move(left), std::move(slope));
  }

  PiecewiseFn as_affine() const { return affine(domain_, breaks_, left_, slope_); }

  friend bool operator==(const PiecewiseFn&, const PiecewiseFn&) = default;

 private:
  PiecewiseFn(Interval domain, std::vector<double> breaks, FnKind kind, std::vector<double> left,
              std::vector<double> slope)
      : domain_(domain), breaks_(std::move(breaks)), kind_(kind), left_(std::move(left)), slope_(std::move(slope)) {
    if (breaks_.size() < 2) throw UsageError("piecewise function needs at least one cell");
    if (left_.size() + 1 != breaks_.size() || slope_.size() != left_.size()) {
      throw UsageError("cell data size does not match breakpoint count");
    }
    if (breaks_.front() != domain_.a || breaks_.back() != domain_.b) {
      throw UsageError("breakpoints must start at a and end at b");
    }
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
      if (!(breaks_[i] < breaks_[i + 1])) throw UsageError("breakpoints must be strictly increasing");
    }
    for (std::size_t i = 0; i < left_.size(); ++i) {
      if (!std::isfinite(left_[i]) || !std::isfinite(slope_[i])) throw UsageError("cell data must be finite");
      if (kind_ == FnKind::Constant && slope_[i] != 0.0) throw UsageError("constant kind carries zero slopes");
    }
  }

  Interval domain_;
  std::vector<double> breaks_;
  FnKind kind_;
  std::vector<double> left_;
  std::vector<double> slope_;
};

}  // namespace sobrev
