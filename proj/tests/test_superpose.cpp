#include <gtest/gtest.h>

#include "sobrev/corpus.hpp"
#include "sobrev/counterex.hpp"
#include "sobrev/superpose.hpp"

using namespace sobrev;

namespace {

// Exhaustive endpoint search on a uniform mesh.
double lambda_grid_oracle(const OuterFn& f, double lo, double hi, double mesh) {
  const int n = static_cast<int>(std::round((hi - lo) / mesh));
  std::vector<double> y(n + 1), fy(n + 1);
  for (int k = 0; k <= n; ++k) {
    y[k] = lo + (hi - lo) * k / n;
    fy[k] = f(y[k]);
  }
  double best = 0.0;
  for (int a = 0; a <= n; ++a) {
    double mx = fy[a], mn = fy[a];
    for (int b = a + 1; b <= n; ++b) {
      mx = std::max(mx, fy[b]);
      mn = std::min(mn, fy[b]);
      if (mx - mn <= 0.0) return INFINITY;
      best = std::max(best, (y[b] - y[a]) / (mx - mn));
    }
  }
  return best;
}

}  // namespace

TEST(Compose, AbsOfRampIsV) {
  const auto ramp = PiecewiseFn::affine({0, 1}, {0, 1}, {-1.0}, {2.0});
  const auto v = compose(OuterFn::abs(), ramp);
  ASSERT_EQ(v.cells(), 2u);
  EXPECT_DOUBLE_EQ(v.breakpoints()[1], 0.5);
  EXPECT_DOUBLE_EQ(v.slope(0), -2.0);
  EXPECT_DOUBLE_EQ(v.slope(1), 2.0);
  EXPECT_TRUE(v.is_continuous());
}

TEST(Compose, CollapsesSquareWave) {
  for (int j : {1, 2, 5, 64}) {
    for (const auto& f : {OuterFn::fold(0, 1), OuterFn::abs().scaled(1.0), OuterFn::plateau(0.0, 0.0)}) {
      const double b0 = f.tag() == OuterTag::Abs ? -1.0 : 0.0;
      const double b1 = 1.0;
      if (std::abs(f(b0) - f(b1)) > 0) continue;
      const auto fu = compose(f, square_wave(j, b0, b1));
      EXPECT_TRUE(fu.is_constant_function()) << f.name() << " j=" << j;
    }
  }
}

TEST(Compose, ConstantInputs) {
  const auto c = compose(OuterFn::abs(), PiecewiseFn::uniform_value({0, 1}, -3.0));
  EXPECT_EQ(c(0.5), 3.0);
  EXPECT_EQ(c.kind(), FnKind::Constant);
  const auto sq = compose(OuterFn::square(), square_wave(3, -2.0, 1.0));
  EXPECT_EQ(sq(0.1), 4.0);
  EXPECT_EQ(sq(0.5), 1.0);
}

TEST(Compose, SquareOfAffineUnsupported) {
  EXPECT_THROW(compose(OuterFn::square(), ramp_rescale(1, 0, 1)), UnsupportedComposition);
}

TEST(Compose, PreservesEval) {
  const std::vector<OuterFn> fs{OuterFn::abs(), OuterFn::clamp(-0.2, 0.5), OuterFn::plateau(-1, 2), OuterFn::fold(-1, 1),
                                OuterFn::pieces({{-1, 0}, {0, 2}, {0.3, 1}, {1, 1.5}}), OuterFn::abs().scaled(-2.5)};
  for (std::size_t m = 0; m < 20; ++m) {
    CounterRng rng(3, m);
    const auto u = m % 2 ? random_continuous_affine(rng) : random_mixed(rng);
    for (const auto& f : fs) {
      const auto fu = compose(f, u);
      CounterRng xs(4, m);
      for (int k = 0; k < 1000; ++k) {
        const double x = xs.uniform(0.0, 1.0);
        EXPECT_NEAR(fu(x), f(u(x)), 1e-12) << f.name();
      }
    }
  }
}

TEST(Limsup, Examples) {
  EXPECT_NEAR(limsup_factor(OuterFn::abs(), 0.0).value, 1.0, 1e-12);
  EXPECT_NEAR(limsup_factor(OuterFn::square(), 2.0).value, 0.25, 1e-6);
  const auto flat = limsup_factor(OuterFn::clamp(0, 1), 2.0);
  EXPECT_TRUE(std::isinf(flat.value));
  EXPECT_NEAR(limsup_factor(OuterFn::clamp(0, 1), 0.5).value, 1.0, 1e-12);
  // at the clamp corner one side is flat: the ratio blows up there
  EXPECT_TRUE(std::isinf(limsup_factor(OuterFn::clamp(0, 1), 1.0).value));
}

TEST(Limsup, AbsIsOneEverywhere) {
  CounterRng rng(8, 0);
  for (int k = 0; k < 200; ++k) {
    const double z = k == 0 ? 0.0 : rng.uniform(-50, 50);
    const auto r = limsup_factor(OuterFn::abs(), z);
    EXPECT_NEAR(r.value, 1.0, 1e-9) << z;
    EXPECT_TRUE(r.stabilized);
  }
}

TEST(Limsup, KinkUsesSteeperSideReciprocal) {
  // slopes 2 and 0.5 at 0: the ratio is 1/0.5 on the shallow side
  const auto f = OuterFn::pieces({{-1, -2}, {0, 0}, {1, 0.5}});
  EXPECT_NEAR(limsup_factor(f, 0.0).value, 2.0, 1e-9);
}

TEST(Limsup, ScheduleValidation) {
  const std::vector<double> few{1, 0.5, 0.25};
  EXPECT_THROW(limsup_factor(OuterFn::abs(), 0.0, few), UsageError);
  std::vector<double> bad = default_schedule(0.0);
  std::swap(bad[2], bad[3]);
  EXPECT_THROW(limsup_factor(OuterFn::abs(), 0.0, bad), UsageError);
}

TEST(Lambda, Examples) {
  EXPECT_NEAR(lambda_constant(OuterFn::abs(), RangeSet::from_pieces({{1, 3}})).value, 1.0, 1e-9);
  EXPECT_NEAR(lambda_constant(OuterFn::abs(), RangeSet::from_pieces({{-1, 1}})).value, 2.0, 1e-6);
  EXPECT_TRUE(std::isinf(lambda_constant(OuterFn::clamp(0, 1), RangeSet::from_pieces({{0, 2}})).value));
}

TEST(Lambda, MatchesGridOracle) {
  const std::vector<std::pair<OuterFn, ClosedRange>> cases{
      {OuterFn::abs(), {-1, 1}},
      {OuterFn::abs(), {-0.3, 0.8}},
      {OuterFn::fold(-1, 1), {-0.9, 0.7}},
      {OuterFn::pieces({{-1, 0}, {0, 2}, {0.3, 1}, {1, 1.5}}), {-1, 1}},
      {OuterFn::square(), {1, 2}},
  };
  for (const auto& [f, r] : cases) {
    const double got = lambda_constant(f, RangeSet::from_pieces({r})).value;
    const double want = lambda_grid_oracle(f, r.lo, r.hi, 1e-3);
    EXPECT_GE(got, want * (1 - 1e-9)) << f.name();
    EXPECT_NEAR(got, want, 2e-3 * want) << f.name();
  }
  // square is flat to first order at 0; any grid stays finite there
  EXPECT_TRUE(std::isinf(lambda_constant(OuterFn::square(), RangeSet::from_pieces({{-0.5, 1}})).value));
}

TEST(Lambda, EmptySupConvention) {
  const auto r = lambda_constant(OuterFn::abs(), square_wave(4, 0, 1).range_exact());
  EXPECT_TRUE(r.empty_sup);
  EXPECT_EQ(r.value, 1.0);
}

TEST(Lambda, LipschitzLowerBoundAndScaling) {
  const std::vector<OuterFn> fs{OuterFn::abs(), OuterFn::clamp(-1, 1), OuterFn::fold(-1, 1), OuterFn::plateau(-1, 3)};
  for (const auto& f : fs) {
    const auto lip = f.lipschitz();
    ASSERT_TRUE(lip.has_value()) << f.name();
    const RangeSet r = RangeSet::from_pieces({{-0.9, 0.6}});
    const double lam = lambda_constant(f, r).value;
    EXPECT_GE(lam, 1.0 / *lip * (1 - 1e-12)) << f.name();
    for (double c : {3.0, -0.5}) {
      EXPECT_NEAR(lambda_constant(f.scaled(c), r).value, lam / std::abs(c), 1e-9 * lam) << f.name();
    }
  }
}

TEST(Lambda, SeveralComponentsTakeTheMax) {
  const auto r = RangeSet::from_pieces({{-3, -2}, {-0.5, 0.5}});
  EXPECT_NEAR(lambda_constant(OuterFn::abs(), r).value, 2.0, 1e-6);
}

TEST(OuterFn, Metadata) {
  EXPECT_EQ(*OuterFn::abs().lipschitz(), 1.0);
  EXPECT_FALSE(OuterFn::abs().injective());
  EXPECT_FALSE(OuterFn::square().lipschitz().has_value());
  EXPECT_FALSE(OuterFn::square().injective());
  EXPECT_EQ(*OuterFn::clamp(0, 1).lipschitz(), 1.0);
  EXPECT_FALSE(OuterFn::clamp(0, 1).injective());
  EXPECT_TRUE(OuterFn::pieces({{0, 0}, {1, 2}}).injective());
  EXPECT_DOUBLE_EQ(OuterFn::plateau(-1, 1)(0.0), 0.0);
  EXPECT_DOUBLE_EQ(OuterFn::plateau(-1, 1)(5.0), 1.0);
}

TEST(OuterFn, ParseRoundTrip) {
  for (const char* text : {"abs", "square", "clamp:0,1", "plateau:-1,2", "fold:0,1", "pieces:-1/0,0/2,1/1", "2*abs"}) {
    const auto f = parse_outer(text);
    const auto g = parse_outer(f.name());
    for (double y : {-2.0, -0.7, 0.0, 0.3, 1.0, 4.0}) EXPECT_DOUBLE_EQ(f(y), g(y)) << text;
  }
  EXPECT_THROW(parse_outer("sin"), ParseError);
  EXPECT_THROW(parse_outer("clamp:1"), ParseError);
}
