#pragma once

// Outer functions f, exact composition f∘u, and the two constants attached
// to f by the reverse estimates: the pointwise factor
//   limsup_{y->z} |y - z| / |f(y) - f(z)|
// and the global amplification
//   λ = sup { diam K / diam f(K) : K ⊂ essential range, K a nondegenerate interval }.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/fn_format.hpp"
#include "sobrev/func1d.hpp"
#include "sobrev/numeric.hpp"

namespace sobrev {

enum class OuterTag { Abs, Square, Clamp, Plateau, AffinePieces };

// Scalar outer function. Every tag except Square is piecewise affine and is
// stored as kinks y_k with values f(y_k) plus the two end slopes.
class OuterFn {
 public:
  static OuterFn abs() { return OuterFn(OuterTag::Abs, {0.0}, {0.0}, -1.0, 1.0); }
  static OuterFn square() { return OuterFn(OuterTag::Square, {}, {}, 0.0, 0.0); }

  static OuterFn clamp(double lo, double hi) {
    if (!(lo < hi)) throw UsageError("clamp needs lo < hi");
    auto f = OuterFn(OuterTag::Clamp, {lo, hi}, {lo, hi}, 0.0, 0.0);
    f.params_ = {lo, hi};
    return f;
  }

  // The ramp t -> (1-t)/2 b0 + (1+t)/2 b1 on (-1, 1), constant outside.
  static OuterFn plateau(double b0, double b1) {
    auto f = OuterFn(OuterTag::Plateau, {-1.0, 1.0}, {b0, b1}, 0.0, 0.0);
    f.params_ = {b0, b1};
    return f;
  }

  // Linear interpolation through (y_k, f_k), extended linearly past the ends.
  static OuterFn pieces(std::vector<std::pair<double, double>> nodes) {
    if (nodes.size() < 2) throw UsageError("affine pieces need at least two nodes");
    std::sort(nodes.begin(), nodes.end());
    std::vector<double> ys, fs;
    for (const auto& [y, v] : nodes) {
      if (!ys.empty() && !(y > ys.back())) throw UsageError("affine piece nodes must be distinct");
      ys.push_back(y);
      fs.push_back(v);
    }
    const std::size_t n = ys.size();
    const double left = (fs[1] - fs[0]) / (ys[1] - ys[0]);
    const double right = (fs[n - 1] - fs[n - 2]) / (ys[n - 1] - ys[n - 2]);
    return OuterFn(OuterTag::AffinePieces, std::move(ys), std::move(fs), left, right);
  }

  // Tent through (b0, 0), ((b0+b1)/2, 1), (b1, 0): Lipschitz, f(b0) = f(b1).
  static OuterFn fold(double b0, double b1) {
    if (b0 == b1) throw UsageError("fold needs b0 != b1");
    return pieces({{b0, 0.0}, {0.5 * (b0 + b1), 1.0}, {b1, 0.0}});
  }

  OuterFn scaled(double c) const {
    OuterFn f = *this;
    f.scale_ *= c;
    return f;
  }

  OuterTag tag() const noexcept { return tag_; }
  double scale() const noexcept { return scale_; }
  bool piecewise_affine() const noexcept { return tag_ != OuterTag::Square; }
  std::span<const double> kinks() const noexcept { return ys_; }

  double operator()(double y) const {
    if (tag_ == OuterTag::Square) return scale_ * y * y;
    return scale_ * base_eval(y);
  }

  // Slope of the affine piece containing y (pieces are half-open to the right).
  double slope_right(double y) const {
    if (tag_ == OuterTag::Square) return 2.0 * scale_ * y;
    return scale_ * piece_slope(piece_index_right(y));
  }
  double slope_left(double y) const {
    if (tag_ == OuterTag::Square) return 2.0 * scale_ * y;
    return scale_ * piece_slope(piece_index_left(y));
  }

  // Largest |slope|; none for Square (not globally Lipschitz).
  std::optional<double> lipschitz() const {
    if (tag_ == OuterTag::Square) return std::nullopt;
    double m = 0.0;
    for (std::size_t k = 0; k <= ys_.size(); ++k) m = std::max(m, std::abs(piece_slope(k)));
    return m * std::abs(scale_);
  }

  bool injective() const {
    if (tag_ == OuterTag::Square || scale_ == 0.0) return false;
    bool up = true, down = true;
    for (std::size_t k = 0; k <= ys_.size(); ++k) {
      const double s = piece_slope(k);
      if (!(s > 0.0)) up = false;
      if (!(s < 0.0)) down = false;
    }
    return up || down;
  }

  // Affine piece k spans (ys[k-1], ys[k]); piece 0 and piece ys.size() are
  // the unbounded end pieces.
  std::size_t piece_count() const noexcept { return ys_.size() + 1; }
  double piece_slope(std::size_t k) const {
    if (k == 0) return left_slope_;
    if (k == ys_.size()) return right_slope_;
    return (fs_[k] - fs_[k - 1]) / (ys_[k] - ys_[k - 1]);
  }
  // Open y-range of piece k.
  std::pair<double, double> piece_span(std::size_t k) const {
    const double lo = k == 0 ? -kInf : ys_[k - 1];
    const double hi = k == ys_.size() ? kInf : ys_[k];
    return {lo, hi};
  }

  std::string name() const {
    std::string base;
    switch (tag_) {
      case OuterTag::Abs: base = "abs"; break;
      case OuterTag::Square: base = "square"; break;
      case OuterTag::Clamp: base = "clamp:" + format_number(params_[0]) + "," + format_number(params_[1]); break;
      case OuterTag::Plateau: base = "plateau:" + format_number(params_[0]) + "," + format_number(params_[1]); break;
      case OuterTag::AffinePieces:
        base = "pieces:";
        for (std::size_t k = 0; k < ys_.size(); ++k) {
          if (k > 0) base += ",";
          base += format_number(ys_[k]) + "/" + format_number(fs_[k]);
        }
        break;
    }
    if (scale_ != 1.0) base = format_number(scale_) + "*" + base;
    return base;
  }

 private:
  OuterFn(OuterTag tag, std::vector<double> ys, std::vector<double> fs, double left, double right)
      : tag_(tag), ys_(std::move(ys)), fs_(std::move(fs)), left_slope_(left), right_slope_(right) {}

  std::size_t piece_index_right(double y) const {
    return static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin());
  }
  std::size_t piece_index_left(double y) const {
    return static_cast<std::size_t>(std::lower_bound(ys_.begin(), ys_.end(), y) - ys_.begin());
  }

  double base_eval(double y) const {
    const std::size_t k = piece_index_right(y);
    if (k == 0) return fs_.front() + left_slope_ * (y - ys_.front());
    return fs_[k - 1] + piece_slope(k) * (y - ys_[k - 1]);
  }

  OuterTag tag_;
  std::vector<double> ys_;
  std::vector<double> fs_;
  double left_slope_;
  double right_slope_;
  double scale_ = 1.0;
  std::vector<double> params_;
};

// Parses abs | square | clamp:lo,hi | plateau:b0,b1 | pieces:y0/f0,y1/f1,...
// with an optional `c*` scale prefix.
inline OuterFn parse_outer(std::string_view text) {
  text = detail::trim(text);
  double scale = 1.0;
  if (const auto star = text.find('*'); star != std::string_view::npos) {
    scale = parse_number(text.substr(0, star));
    text = detail::trim(text.substr(star + 1));
  }
  const auto colon = text.find(':');
  const std::string_view head = detail::trim(text.substr(0, colon));
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto two = [&](const char* what) {
    const auto v = parse_number_list(args);
    if (v.size() != 2) throw ParseError(std::string(what) + " takes two numbers");
    return v;
  };
  OuterFn f = OuterFn::abs();
  if (head == "abs") {
    f = OuterFn::abs();
  } else if (head == "square") {
    f = OuterFn::square();
  } else if (head == "clamp") {
    const auto v = two("clamp");
    f = OuterFn::clamp(v[0], v[1]);
  } else if (head == "plateau") {
    const auto v = two("plateau");
    f = OuterFn::plateau(v[0], v[1]);
  } else if (head == "fold") {
    const auto v = two("fold");
    f = OuterFn::fold(v[0], v[1]);
  } else if (head == "pieces") {
    std::vector<std::pair<double, double>> nodes;
    for (auto item : detail::split(args, ',')) {
      const auto slash = item.find('/');
      if (slash == std::string_view::npos) throw ParseError("pieces entries are y/f");
      nodes.emplace_back(parse_number(item.substr(0, slash)), parse_number(item.substr(slash + 1)));
    }
    f = OuterFn::pieces(std::move(nodes));
  } else {
    throw ParseError("unknown outer function '" + std::string(head) + "'");
  }
  return scale == 1.0 ? f : f.scaled(scale);
}

// Exact f∘u. Affine u is split where it crosses a kink of f, so every output
// cell is affine. Square composes only with Constant-kind u.
inline PiecewiseFn compose(const OuterFn& f, const PiecewiseFn& u) {
  if (u.kind() == FnKind::Constant) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < u.cells(); ++i) vals.push_back(f(u.left_value(i)));
    const auto br = u.breakpoints();
    return PiecewiseFn::constant(u.domain(), {br.begin(), br.end()}, std::move(vals));
  }
  if (!f.piecewise_affine()) throw UnsupportedComposition("square composes exactly only with piecewise-constant u");

  const double tol = u.merge_tolerance();
  std::vector<double> breaks{u.domain().a}, left, slope;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const Interval c = u.cell(i);
    const double s = u.slope(i);
    std::vector<double> pts{c.a, c.b};
    if (s != 0.0) {
      for (double y : f.kinks()) {
        const double x = c.a + (y - u.left_value(i)) / s;
        if (x > c.a + tol && x < c.b - tol) pts.push_back(x);
      }
    }
    sort_unique(pts, tol);
    for (std::size_t n = 0; n + 1 < pts.size(); ++n) {
      const double mid = u.eval_in_cell(i, 0.5 * (pts[n] + pts[n + 1]));
      left.push_back(f(u.eval_in_cell(i, pts[n])));
      slope.push_back(f.slope_right(mid) * s);
      breaks.push_back(pts[n + 1]);
    }
  }
  breaks.back() = u.domain().b;
  return PiecewiseFn::affine(u.domain(), std::move(breaks), std::move(left), std::move(slope));
}

struct LimsupResult {
  double value = 0.0;
  bool stabilized = false;
};

// Radii 0.1 max(1, |z|) 2^-k, k = 0..levels-1. The floor keeps y - z well
// above the rounding level of f(y) - f(z).
inline std::vector<double> default_schedule(double z, int levels = 20) {
  std::vector<double> r;
  double x = 0.1 * std::max(1.0, std::abs(z));
  for (int k = 0; k < levels; ++k, x *= 0.5) r.push_back(x);
  return r;
}

// Estimates limsup_{y->z} |y - z| / |f(y) - f(z)| by the maximum of the ratio
// over samples in each annulus r_{k+1} < |y - z| <= r_k, accepted once the
// last three annulus maxima agree to 1e-4.
inline LimsupResult limsup_factor(const OuterFn& f, double z, std::span<const double> radii, int samples = 16) {
  if (radii.size() < 8) throw UsageError("limsup schedule needs at least 8 radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] < radii[k - 1]))) {
      throw UsageError("limsup schedule must be positive and strictly decreasing");
    }
  }
  const double fz = f(z);
  std::vector<double> maxima;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    double m = 0.0;
    for (int n = 1; n <= samples; ++n) {
      const double r = radii[k + 1] + (radii[k] - radii[k + 1]) * n / samples;
      for (double y : {z + r, z - r}) {
        const double dy = std::abs(y - z);
        const double df = std::abs(f(y) - fz);
        m = std::max(m, df == 0.0 ? kInf : dy / df);
      }
    }
    maxima.push_back(m);
  }
  const std::size_t n = maxima.size();
  const double a = maxima[n - 3], b = maxima[n - 2], c = maxima[n - 1];
  if (std::isinf(a) && std::isinf(b) && std::isinf(c)) return {kInf, true};
  if (std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) {
    const double spread = std::max({a, b, c}) - std::min({a, b, c});
    if (spread <= 1e-4 * c) return {c, true};
    if (b >= 1.5 * a && c >= 1.5 * b) return {kInf, false};
  }
  return {c, false};
}

inline LimsupResult limsup_factor(const OuterFn& f, double z) {
  const auto r = default_schedule(z);
  return limsup_factor(f, z, r);
}

struct LambdaResult {
  double value = 1.0;
  // No nondegenerate interval fits in the range: the sup is over the empty
  // set and `value` is the conventional 1.
  bool empty_sup = false;
};

namespace detail {

inline double outer_diameter(const OuterFn& f, double lo, double hi) {
  double mx = std::max(f(lo), f(hi));
  double mn = std::min(f(lo), f(hi));
  auto visit = [&](double y) {
    if (y > lo && y < hi) {
      mx = std::max(mx, f(y));
      mn = std::min(mn, f(y));
    }
  };
  for (double y : f.kinks()) visit(y);
  if (f.tag() == OuterTag::Square) visit(0.0);
  return mx - mn;
}

inline double diameter_ratio(const OuterFn& f, double lo, double hi) {
  const double d = outer_diameter(f, lo, hi);
  return d > 0.0 ? (hi - lo) / d : kInf;
}

// Maximises g on [lo, hi] assuming unimodality.
template <class G>
std::pair<double, double> golden_max(G&& g, double lo, double hi, int iters = 80) {
  constexpr double kPhi = 0.6180339887498949;
  double x1 = hi - kPhi * (hi - lo), x2 = lo + kPhi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kPhi * (hi - lo);
      g2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kPhi * (hi - lo);
      g1 = g(x1);
    }
  }
  return g1 >= g2 ? std::pair{x1, g1} : std::pair{x2, g2};
}

inline double lambda_on_component(const OuterFn& f, double c, double d, int grid) {
  if (f.scale() == 0.0) return kInf;
  // flat stretch of f inside [c, d]
  if (f.piecewise_affine()) {
    for (std::size_t k = 0; k < f.piece_count(); ++k) {
      const auto [lo, hi] = f.piece_span(k);
      if (f.piece_slope(k) == 0.0 && std::min(hi, d) > std::max(lo, c)) return kInf;
    }
  } else if (c <= 0.0 && d >= 0.0) {
    return kInf;  // f'(0) = 0 for the square
  }

  // shrinking K to a point y gives 1 / |f'(y)|
  double best = 0.0;
  auto local = [&](double y) {
    if (y > c) best = std::max(best, 1.0 / std::abs(f.slope_left(y)));
    if (y < d) best = std::max(best, 1.0 / std::abs(f.slope_right(y)));
  };
  local(c);
  local(d);
  for (double y : f.kinks()) {
    if (y >= c && y <= d) local(y);
  }

  std::vector<double> nodes(grid);
  for (int i = 0; i < grid; ++i) nodes[i] = c + (d - c) * i / (grid - 1);
  nodes.back() = d;
  double grid_best = 0.0;
  int bi = 0, bj = 1;
  for (int i = 0; i < grid; ++i) {
    local(nodes[i]);
    for (int j = i + 1; j < grid; ++j) {
      const double r = diameter_ratio(f, nodes[i], nodes[j]);
      if (r > grid_best) {
        grid_best = r;
        bi = i;
        bj = j;
      }
    }
  }
  // coordinate-wise golden-section refinement around the best grid pair
  const double h = (d - c) / (grid - 1);
  double lo = nodes[bi], hi = nodes[bj];
  double val = grid_best;
  for (int round = 0; round < 8; ++round) {
    const double prev = val;
    const double lo_max = std::min(hi, lo + h);
    auto [nlo, vlo] = golden_max([&](double x) { return x < hi ? diameter_ratio(f, x, hi) : 0.0; },
                                 std::max(c, lo - h), lo_max);
    if (vlo > val) {
      lo = nlo;
      val = vlo;
    }
    auto [nhi, vhi] = golden_max([&](double x) { return x > lo ? diameter_ratio(f, lo, x) : 0.0; },
                                 std::max(lo, hi - h), std::min(d, hi + h));
    if (vhi > val) {
      hi = nhi;
      val = vhi;
    }
    if (val - prev <= 1e-12 * val) break;
  }
  return std::max(best, val);
}

}  // namespace detail

// λ over the nondegenerate components of the essential range. Intervals are
// the connected compacts of the line, so the sup is a two-variable search
// over endpoints: a 256 x 256 grid, then golden-section refinement.
inline LambdaResult lambda_constant(const OuterFn& f, const RangeSet& range, int grid = 256) {
  LambdaResult out;
  bool any = false;
  double best = 0.0;
  for (const auto& comp : range.components()) {
    if (!(comp.hi > comp.lo)) continue;
    any = true;
    best = std::max(best, detail::lambda_on_component(f, comp.lo, comp.hi, grid));
  }
  if (!any) {
    out.empty_sup = true;
    out.value = 1.0;
    return out;
  }
  out.value = best;
  return out;
}

}  // namespace sobrev
