#pragma once

// Numerical building blocks shared by the seminorm engines: compensated
// summation, the exact mean of |affine|^p over a segment, and an adaptive
// Gauss-Kronrod (7,15) integrator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace sobrev {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier's variant of Kahan summation. Infinite terms short-circuit.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    if (!std::isfinite(x) || !std::isfinite(sum_)) {
      sum_ += x;
      return;
    }
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return std::isfinite(sum_) ? sum_ + comp_ : sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Mean of |v0 + (v1 - v0) t|^p over t in [0, 1], p >= 1, in closed form.
inline double mean_abs_pow(double v0, double v1, double p) {
  const double a = std::abs(v0);
  const double b = std::abs(v1);
  if (a == 0.0 && b == 0.0) return 0.0;
  if ((v0 < 0.0) != (v1 < 0.0) && a > 0.0 && b > 0.0) {
    // sign change inside: two power pieces meeting at zero
    return (std::pow(a, p + 1.0) + std::pow(b, p + 1.0)) / ((p + 1.0) * (a + b));
  }
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi - lo > 1e-4 * hi) {
    return (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / ((p + 1.0) * (hi - lo));
  }
  // nearly constant magnitude: even Taylor series around the midpoint
  const double m = 0.5 * (hi + lo);
  const double r = 0.5 * (hi - lo) / m;
  const double r2 = r * r;
  const double c2 = p * (p - 1.0) / 6.0;
  const double c4 = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 120.0;
  return std::pow(m, p) * (1.0 + r2 * (c2 + c4 * r2));
}

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr std::array<double, 4> kLegendre8Nodes = {
    0.183434642495649804939476142360184, 0.525532409916328985817739049189246,
    0.796666477413626739591553936475831, 0.960289856497536231683560868569473};
inline constexpr std::array<double, 4> kLegendre8Weights = {
    0.362683783378361982965150449277196, 0.313706645877887287337962201986601,
    0.222381034453374470544355994426241, 0.101228536290376259152531354309962};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const noexcept { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double s = f(c - dx) + f(c + dx);
    kron += kKronrodWeights[i] * s;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_panels = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  int panels = 0;
};

// Adaptive G7/K15 integration over consecutive segments of `breaks` (sorted).
// The panel with the largest |K15 - G7| is bisected until the summed error
// meets max(abs_tol, rel_tol * |value|) or the panel budget runs out.
template <class F>
QuadResult integrate(F&& f, std::span<const double> breaks, const QuadOptions& opt = {}) {
  QuadResult out;
  if (breaks.size() < 2) return out;
  std::vector<detail::Panel> heap;
  heap.reserve(breaks.size() + 64);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) heap.push_back(detail::gk15(f, breaks[i], breaks[i + 1]));
  }
  std::make_heap(heap.begin(), heap.end());

  auto totals = [&heap]() {
    CompensatedSum v, e;
    for (const auto& p : heap) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v.value(), e.value()};
  };

  auto [value, error] = totals();
  int since_resum = 0;
  while (!heap.empty() && error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) break;
    std::pop_heap(heap.begin(), heap.end());
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // cannot split further in floating point
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const detail::Panel left = detail::gk15(f, worst.a, mid);
    const detail::Panel right = detail::gk15(f, mid, worst.b);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    if (++since_resum == 64) {
      std::tie(value, error) = totals();
      since_resum = 0;
    }
  }
  std::tie(value, error) = totals();
  out.value = value;
  out.error = error;
  out.panels = static_cast<int>(heap.size());
  out.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
  return out;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  const std::array<double, 2> ends = {a, b};
  return integrate(std::forward<F>(f), std::span<const double>(ends), opt);
}

// Fixed 8-point Gauss-Legendre rule on [a, b]. For smooth integrands only.
template <class F>
double gauss_legendre8(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double dx = h * detail::kLegendre8Nodes[i];
    sum += detail::kLegendre8Weights[i] * (f(c - dx) + f(c + dx));
  }
  return sum * h;
}

// Sorts and removes points closer than `tol` to their predecessor.
inline void sort_unique(std::vector<double>& pts, double tol) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  out.reserve(pts.size());
  for (double x : pts) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  pts.swap(out);
}

}  // namespace sobrev
