#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sobrev/counterex.hpp"

using namespace sobrev;

TEST(SquareWave, Construction) {
  const auto u1 = square_wave(1, 3.0, 5.0);
  EXPECT_EQ(u1.cells(), 1u);
  EXPECT_EQ(u1(0.9), 3.0);
  const auto u2 = square_wave(2, 0.0, 1.0);
  EXPECT_EQ(u2(0.2), 0.0);
  EXPECT_EQ(u2(0.7), 1.0);
  const auto u4 = square_wave(4, 0.0, 1.0);
  const double want[] = {0, 1, 0, 1};
  for (int k = 0; k < 4; ++k) EXPECT_EQ(u4((k + 0.5) / 4), want[k]);
  EXPECT_EQ(u4.kind(), FnKind::Constant);
  EXPECT_THROW(square_wave(0, 0, 1), UsageError);
}

TEST(RampRescale, Construction) {
  const auto r1 = ramp_rescale(1, 0.0, 1.0);
  EXPECT_EQ(r1.cells(), 1u);
  EXPECT_DOUBLE_EQ(r1(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(r1(0.5), 0.75);
  for (int j : {1, 2, 3, 8, 64}) EXPECT_DOUBLE_EQ(ramp_rescale(j, -2.0, 4.0)(0.0), 1.0) << j;
  const auto r8 = ramp_rescale(8, 0.0, 1.0);
  EXPECT_EQ(r8(0.5), 1.0);
  EXPECT_EQ(r8(-0.5), 0.0);
  EXPECT_TRUE(r8.is_continuous());
  // u_j(x) = u_*(j x)
  for (double x : {-0.9, -0.1, -0.05, 0.03, 0.12, 0.7}) {
    const double t = 8 * x;
    const double ustar = t <= -1 ? 0.0 : t >= 1 ? 1.0 : 0.5 * (1 + t);
    EXPECT_NEAR(r8(x), ustar, 1e-15) << x;
  }
}

TEST(BlowupBracket, Examples) {
  const auto b = blowup_bracket(4, 0.5, 1, 0.0, 1.0);
  EXPECT_NEAR(*b.upper, 16.0, 1e-12);
  EXPECT_NEAR(b.lower, 0.75 * 2 * 2 * (1 - std::pow(2.0, -0.5)) / 0.25, 1e-12);
  EXPECT_NEAR(b.lower, 3.515, 1e-3);
  EXPECT_FALSE(b.log_lower.has_value());
  EXPECT_EQ(blowup_bracket(1, 0.5, 1, 0, 1).lower, 0.0);
  const auto c = blowup_bracket(3, 0.5, 2, 0.0, 1.0);
  ASSERT_TRUE(c.log_lower.has_value());
  EXPECT_NEAR(*c.log_lower, 2.0 * std::log(16.0 / 12.0), 1e-14);
  EXPECT_NEAR(*c.log_lower, 0.5754, 1e-4);
  EXPECT_FALSE(c.upper.has_value());
  EXPECT_THROW(blowup_bracket(3, 0.75, 2, 0, 1), RegimeError);
  for (int j = 2; j <= 64; ++j) {
    const auto d = blowup_bracket(j, 0.3, 3, -1, 2);
    EXPECT_GT(d.lower, 0.0);
    EXPECT_LE(d.lower, *d.upper);
  }
}

TEST(Prop41, GridReportsNoFailures) {
  const std::vector<int> js{1, 2, 4, 8, 16, 32, 64};
  for (auto [s, p] : std::vector<std::pair<double, double>>{{0.25, 2}, {0.5, 1}, {0.3, 3}, {0.45, 2}}) {
    const auto rep = verify_prop41(js, s, p, 0.0, 1.0);
    EXPECT_EQ(rep.failures, 0u) << s << "," << p;
    ASSERT_EQ(rep.rows.size(), js.size());
    EXPECT_EQ(rep.at(0, "seminorm"), 0.0);
    for (std::size_t r = 0; r < rep.rows.size(); ++r) EXPECT_EQ(rep.at(r, "composed_seminorm"), 0.0);
  }
}

TEST(Prop41, ExactSeminormsMatchOracle) {
  for (int j : {2, 3, 8, 16}) {
    const auto u = square_wave(j, 0.0, 1.0);
    for (auto [s, p] : std::vector<std::pair<double, double>>{{0.25, 2}, {0.45, 2}}) {
      const double v = gagliardo(u, {s, p}).value;
      EXPECT_NEAR(v, oracle::seminorm(u, s, p), 1e-10 * v) << j;
    }
  }
}

TEST(Prop41, RateOverSmallJIsPreAsymptotic) {
  // the fitted slope on j in 8..64 overshoots sp; the exact values give these
  const std::vector<int> js{8, 16, 32, 64};
  const auto a = verify_prop41(js, 0.25, 2, 0.0, 1.0);
  EXPECT_NEAR(a.summary.at("slope"), 0.60745, 1e-4);
  const auto b = verify_prop41(js, 0.45, 2, 0.0, 1.0);
  EXPECT_NEAR(b.summary.at("slope"), 0.96153, 1e-4);
}

TEST(Prop41, RateApproachesSpForLargeJ) {
  std::vector<std::pair<double, double>> pts;
  for (int j : {512, 1024, 2048, 4096}) pts.emplace_back(j, gagliardo(square_wave(j, 0.0, 1.0), {0.25, 2}).value);
  const double slope = oracle::loglog_slope(pts);
  EXPECT_NEAR(slope, 0.5, 0.05);
  EXPECT_NEAR(fit_rate(pts).slope, slope, 1e-12);
}

TEST(Prop41, RejectsWrongRegimeAndBadCollapse) {
  const std::vector<int> js{2, 4};
  EXPECT_THROW(verify_prop41(js, 0.5, 2, 0, 1), RegimeError);
  EXPECT_THROW(verify_prop41(js, 0.25, 2, 0, 1, OuterFn::abs()), UsageError);
  EXPECT_NO_THROW(verify_prop41(js, 0.25, 2, -1, 1, OuterFn::abs()));
}

TEST(Prop41, ThreadedMatchesSerial) {
  const std::vector<int> js{1, 2, 3, 5, 8, 13, 21, 34};
  EXPECT_EQ(verify_prop41(js, 0.3, 3, 0, 1, std::nullopt, 4).to_csv(), verify_prop41(js, 0.3, 3, 0, 1).to_csv());
}

TEST(Prop42, LogLowerBoundAndBoundedComposition) {
  std::vector<int> js;
  for (int j = 1; j <= 64; ++j) js.push_back(j);
  for (auto [s, p] : std::vector<std::pair<double, double>>{{0.5, 2}, {1.0 / 3.0, 3}}) {
    const auto rep = verify_prop42(js, s, p, -1.0, 1.0, OuterFn::abs(), 4);
    EXPECT_EQ(rep.failures, 0u);
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
      const double j = rep.at(r, "j");
      EXPECT_NEAR(rep.at(r, "log_lower"), 2.0 * std::pow(2.0, p) * std::log((j + 1) * (j + 1) / (4 * j)), 1e-12);
      EXPECT_GE(rep.at(r, "seminorm"), rep.at(r, "log_lower"));
      EXPECT_TRUE(std::isfinite(rep.at(r, "composed_seminorm")));
    }
    EXPECT_EQ(rep.summary.at("composed_monotone"), 1.0);
    EXPECT_GT(rep.summary.at("log_slope"), 0.0);
    EXPECT_GT(rep.summary.at("log_r2"), 0.99);
  }
}

TEST(Prop42, FirstRampValues) {
  // u_1 is the line x on (-1,1): the seminorm is ∬ |y-x|^(p-2)
  const std::vector<int> one{1};
  const auto a = verify_prop42(one, 0.5, 2, -1, 1, OuterFn::abs());
  EXPECT_NEAR(a.at(0, "seminorm"), 4.0, 1e-9);
  const auto b = verify_prop42(one, 1.0 / 3.0, 3, -1, 1, OuterFn::abs());
  EXPECT_NEAR(b.at(0, "seminorm"), 8.0 / 3.0, 1e-9);
  EXPECT_TRUE(std::isfinite(a.at(0, "composed_seminorm")));
}

TEST(Prop42, ComposedMatchesOracle) {
  for (int j : {1, 4, 16}) {
    const auto fu = compose(OuterFn::abs(), ramp_rescale(j, -1, 1));
    const double v = gagliardo(fu, {0.5, 2}).value;
    EXPECT_NEAR(v, oracle::seminorm(fu, 0.5, 2), 1e-8 * v) << j;
  }
}

TEST(Prop42, Preconditions) {
  const std::vector<int> js{1, 2};
  EXPECT_THROW(verify_prop42(js, 0.25, 2, -1, 1, OuterFn::abs()), RegimeError);
  EXPECT_THROW(verify_prop42(js, 0.5, 2, 0, 1, OuterFn::abs()), UsageError);
  EXPECT_THROW(verify_prop42(js, 0.5, 2, -1, 1, OuterFn::square()), UsageError);
}

TEST(RegimeContrast, SquareWaveDivergesForSpAtLeastOne) {
  for (auto [s, p] : std::vector<std::pair<double, double>>{{0.5, 2}, {0.75, 2}, {0.6, 3}, {0.9, 1.5}}) {
    for (int j : {2, 3, 8}) {
      const auto r = gagliardo(square_wave(j, 0, 1), {s, p});
      EXPECT_TRUE(std::isinf(r.value));
      EXPECT_TRUE(r.witness.has_value());
    }
  }
}
