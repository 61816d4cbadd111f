#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sobrev/harness.hpp"

using namespace sobrev;

TEST(FitRate, ExactPowerData) {
  std::vector<std::pair<double, double>> pts;
  for (int j : {2, 4, 8, 16, 32}) pts.emplace_back(j, 3.0 * std::sqrt(j));
  const auto fit = fit_rate(pts);
  EXPECT_NEAR(fit.slope, 0.5, 1e-14);
  EXPECT_NEAR(fit.r2, 1.0, 1e-14);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-12);
}

TEST(FitRate, LogarithmicModel) {
  std::vector<std::pair<double, double>> pts;
  for (int j = 2; j <= 10; ++j) pts.emplace_back(j, 1.0 + 2.0 * std::log(j));
  const auto fit = fit_rate(pts, RateModel::Logarithmic);
  EXPECT_NEAR(fit.slope, 2.0, 1e-13);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-13);
}

TEST(FitRate, Errors) {
  std::vector<std::pair<double, double>> three{{1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(fit_rate(three), FitError);
  std::vector<std::pair<double, double>> neg{{1, 1}, {2, 2}, {3, -3}, {4, 4}};
  EXPECT_THROW(fit_rate(neg), FitError);
  std::vector<std::pair<double, double>> zero{{1, 1}, {2, 0}, {3, 3}, {4, 4}};
  EXPECT_THROW(fit_rate(zero), FitError);
  std::vector<std::pair<double, double>> same_j{{2, 1}, {2, 2}, {2, 3}, {2, 4}};
  EXPECT_THROW(fit_rate(same_j), FitError);
}

TEST(CounterRng, DeterministicAndInRange) {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    const int n = a.integer(4, 32);
    b.integer(4, 32);
    EXPECT_GE(n, 4);
    EXPECT_LE(n, 32);
  }
  EXPECT_TRUE(differs);
  // first draws are pinned so generator changes show up
  EXPECT_EQ(CounterRng(0, 0).next_u64(), CounterRng(0, 0).next_u64());
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
}

TEST(Corpus, Shapes) {
  for (std::size_t m = 0; m < 200; ++m) {
    CounterRng rng(1, m);
    const auto u = random_continuous_affine(rng);
    EXPECT_GE(u.cells(), 4u);
    EXPECT_LE(u.cells(), 32u);
    EXPECT_TRUE(u.is_continuous());
    CounterRng rng2(1, m);
    const auto v = random_sign_changing(rng2);
    EXPECT_LT(v.range_exact().min(), 0.0);
    EXPECT_GT(v.range_exact().max(), 0.0);
  }
}

TEST(Config, ParsesAllKeys) {
  const auto cfg = parse_config(R"(# comment line
scenario = Thm31
s_grid = 0.75, 0.9   # trailing comment
p_grid = 2
j_list = 1..4, 8
corpus_size = 5
seed = 18446744073709551615
tol = 1e-9
out_path = out/x.csv
b0 = -2
b1 = 2
f = abs
corpus = continuous
threads = 3
)");
  EXPECT_EQ(cfg.scenario, Scenario::Thm31);
  EXPECT_EQ(cfg.s_grid, (std::vector<double>{0.75, 0.9}));
  EXPECT_EQ(cfg.j_list, (std::vector<int>{1, 2, 3, 4, 8}));
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.threads, 3u);
  EXPECT_EQ(cfg.corpus_kind(), CorpusKind::Continuous);
  EXPECT_EQ(cfg.param_pairs().size(), 2u);
  const auto pairs = parse_config("scenario=Prop41\npairs=0.25:2, 0.5:1\n").param_pairs();
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1], std::make_pair(0.5, 1.0));
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("s_grid=0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop99\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop41\ncolor=red\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop41\nscenario=Prop41\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop41\nj_list=1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop41\ns_grid=a\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario=Prop41\nno equals sign\n"), ConfigError);
}

TEST(Validate, RegimeMismatchBeforeComputation) {
  EXPECT_THROW(run(parse_config("scenario=Prop41\npairs=0.5:2\nj_list=2\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=Prop42\npairs=0.25:2\nj_list=2\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=Thm31\ns_grid=0.5\np_grid=2\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=Prop32\ns_grid=0.25\np_grid=2\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=FirstOrder\ns_grid=0.5\np_grid=2\npairs=0.5:2\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=Prop41\npairs=0.25:2\n")), ConfigError);  // no j_list
  EXPECT_THROW(run(parse_config("scenario=Thm31\np_grid=2\n")), ConfigError);      // no s_grid
  EXPECT_THROW(run(parse_config("scenario=Thm31\ns_grid=0.75\np_grid=2\nf=square\n")), ConfigError);
  EXPECT_THROW(run(parse_config("scenario=Prop41\npairs=0.25:2\nj_list=2\nb0=0\nb1=1\nf=abs\n")), ConfigError);
}

TEST(Run, EmptyCorpusEchoesConfig) {
  const auto rep = run(parse_config("scenario=Thm31\ns_grid=0.75\np_grid=2\ncorpus_size=0\n"));
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_EQ(rep.config["scenario"], "Thm31");
  EXPECT_EQ(rep.to_csv(), "s,p,member,cells,lambda,seminorm_u,seminorm_fu,c_required,pass\n");
}

TEST(Run, Prop41NoFailures) {
  const auto rep = run(parse_config("scenario=Prop41\npairs=0.25:2\nj_list=1,2,4,8,16,32,64\nb0=0\nb1=1\n"));
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_EQ(rep.rows.size(), 7u);
  EXPECT_TRUE(rep.summary.count("slope[s=0.25,p=2]"));
}

TEST(Run, Thm31AbsOnSignChangingCorpus) {
  const auto rep = run(parse_config("scenario=Thm31\ns_grid=0.75\np_grid=2\ncorpus_size=8\nseed=5\n"));
  EXPECT_EQ(rep.failures, 0u);
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    EXPECT_NEAR(rep.at(r, "lambda"), 2.0, 1e-3);
    EXPECT_TRUE(std::isfinite(rep.at(r, "c_required")));
  }
  EXPECT_TRUE(std::isfinite(rep.summary.at("c_emp_max")));
}

TEST(Run, DeterministicAcrossThreadCounts) {
  const std::string base = "scenario=Prop32\ns_grid=0.75\np_grid=2\ncorpus_size=6\nseed=77\n";
  const auto a = run(parse_config(base));
  const auto b = run(parse_config(base + "threads=4\n"));
  const auto c = run(parse_config(base));
  EXPECT_EQ(a.to_csv(), c.to_csv());
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.failures, 0u);
}

TEST(Run, FirstOrderScenario) {
  const auto rep = run(parse_config("scenario=FirstOrder\np_grid=1,1.5,2,3\ncorpus_size=10\nseed=3\n"));
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_EQ(rep.rows.size(), 40u);
  EXPECT_LE(rep.summary.at("rel_gap_max"), 1e-12);
}

TEST(WriteReport, CsvAndJsonMirror) {
  const auto dir = std::filesystem::temp_directory_path() / "sobrev_write_test";
  std::filesystem::remove_all(dir);
  const auto rep = run(parse_config("scenario=Prop41\npairs=0.25:2\nj_list=1,2,4,8\nb0=0\nb1=1\n"));
  write_report(rep, dir / "r.csv");
  std::ifstream csv(dir / "r.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "s,p,j,seminorm,lower,upper,composed_seminorm,pass");
  std::ifstream js(dir / "r.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["scenario"], "Prop41");
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["summary"]["failures"], 0);
  std::filesystem::remove_all(dir);
}

TEST(WriteReport, EnvOverridesOutPath) {
  auto cfg = parse_config("scenario=Prop41\npairs=0.25:2\nj_list=2\nout_path=a.csv\n");
  ::unsetenv("SOBREV_OUT_PATH");
  EXPECT_EQ(resolve_out_path(cfg), "a.csv");
  ::setenv("SOBREV_OUT_PATH", "b.csv", 1);
  EXPECT_EQ(resolve_out_path(cfg), "b.csv");
  ::unsetenv("SOBREV_OUT_PATH");
}

TEST(Report, NonFiniteValuesSurviveJson) {
  VerificationReport rep;
  rep.columns = {"x"};
  rep.add_row({INFINITY}, true);
  rep.add_row({NAN}, false);
  EXPECT_EQ(rep.failures, 1u);
  EXPECT_EQ(rep.to_csv(), "x,pass\ninf,true\nnan,false\n");
  const auto j = rep.to_json();
  EXPECT_EQ(j["rows"][0][0], "inf");
}
