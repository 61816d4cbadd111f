#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sobrev/corpus.hpp"
#include "sobrev/counterex.hpp"
#include "sobrev/firstorder.hpp"
#include "sobrev/fn_format.hpp"
#include "sobrev/oscillation.hpp"
#include "sobrev/parallel.hpp"
#include "sobrev/report.hpp"

namespace sobrev {

enum class Scenario { Prop41, Prop42, Thm31, Prop32, FirstOrder };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Prop41: return "Prop41";
    case Scenario::Prop42: return "Prop42";
    case Scenario::Thm31: return "Thm31";
    case Scenario::Prop32: return "Prop32";
    case Scenario::FirstOrder: return "FirstOrder";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view text) {
  for (auto s : {Scenario::Prop41, Scenario::Prop42, Scenario::Thm31, Scenario::Prop32, Scenario::FirstOrder}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

enum class CorpusKind { Continuous, SignChanging };

struct ExperimentConfig {
  Scenario scenario = Scenario::Prop41;
  std::vector<double> s_grid;
  std::vector<double> p_grid;
  // Explicit (s, p) pairs; when empty the cartesian product of the grids is used.
  std::vector<std::pair<double, double>> pairs;
  std::vector<int> j_list;
  int corpus_size = 0;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::string out_path;
  double b0 = -1.0;
  double b1 = 1.0;
  std::optional<std::string> f;
  std::optional<CorpusKind> corpus;
  unsigned threads = 1;

  std::vector<std::pair<double, double>> param_pairs() const {
    if (!pairs.empty()) return pairs;
    std::vector<std::pair<double, double>> out;
    if (scenario == Scenario::FirstOrder) {
      for (double p : p_grid) out.emplace_back(1.0, p);
      return out;
    }
    for (double s : s_grid)
      for (double p : p_grid) out.emplace_back(s, p);
    return out;
  }

  CorpusKind corpus_kind() const {
    if (corpus) return *corpus;
    return scenario == Scenario::Thm31 ? CorpusKind::SignChanging : CorpusKind::Continuous;
  }

  OuterFn outer() const {
    if (f) return parse_outer(*f);
    if (scenario == Scenario::Prop41) return OuterFn::fold(b0, b1);
    return OuterFn::abs();
  }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["scenario"] = to_string(scenario);
    j["s_grid"] = s_grid;
    j["p_grid"] = p_grid;
    auto pj = nlohmann::ordered_json::array();
    for (auto [s, p] : param_pairs()) pj.push_back({s, p});
    j["pairs"] = pj;
    j["j_list"] = j_list;
    j["corpus_size"] = corpus_size;
    j["corpus"] = corpus_kind() == CorpusKind::SignChanging ? "sign_changing" : "continuous";
    j["seed"] = seed;
    j["tol"] = tol;
    j["b0"] = b0;
    j["b1"] = b1;
    j["f"] = outer().name();
    j["out_path"] = out_path;
    return j;
  }
};

namespace detail {

inline std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) continue;
    const auto dots = item.find("..");
    auto to_int = [](std::string_view t) {
      const double v = parse_number(t);
      if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("not an integer: '" + std::string(t) + "'");
      return static_cast<int>(v);
    };
    if (dots == std::string_view::npos) {
      out.push_back(to_int(item));
    } else {
      const int lo = to_int(item.substr(0, dots)), hi = to_int(item.substr(dots + 2));
      if (hi < lo || hi - lo > 100000) throw ConfigError("bad range '" + std::string(item) + "'");
      for (int j = lo; j <= hi; ++j) out.push_back(j);
    }
  }
  return out;
}

}  // namespace detail

// key = value lines, '#' starts a comment. Lists are comma separated; j_list
// also accepts ranges lo..hi; pairs is written s:p,s:p.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  bool have_scenario = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(detail::trim(body.substr(0, eq)));
    const auto value = detail::trim(body.substr(eq + 1));
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      if (key == "scenario") {
        cfg.scenario = parse_scenario(value);
        have_scenario = true;
      } else if (key == "s_grid") {
        cfg.s_grid = parse_number_list(value);
      } else if (key == "p_grid") {
        cfg.p_grid = parse_number_list(value);
      } else if (key == "pairs") {
        for (auto item : detail::split(value, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string_view::npos) throw ConfigError("pairs entries look like s:p");
          cfg.pairs.emplace_back(parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1)));
        }
      } else if (key == "j_list") {
        cfg.j_list = detail::parse_int_list(value);
      } else if (key == "corpus_size") {
        cfg.corpus_size = detail::parse_int_list(value).at(0);
      } else if (key == "seed") {
        std::uint64_t s = 0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), s);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) throw ConfigError("bad seed");
        cfg.seed = s;
      } else if (key == "tol") {
        cfg.tol = parse_number(value);
      } else if (key == "out_path") {
        cfg.out_path = std::string(value);
      } else if (key == "b0") {
        cfg.b0 = parse_number(value);
      } else if (key == "b1") {
        cfg.b1 = parse_number(value);
      } else if (key == "f") {
        cfg.f = std::string(value);
      } else if (key == "corpus") {
        if (value == "continuous") cfg.corpus = CorpusKind::Continuous;
        else if (value == "sign_changing") cfg.corpus = CorpusKind::SignChanging;
        else throw ConfigError("corpus is continuous or sign_changing");
      } else if (key == "threads") {
        const int t = detail::parse_int_list(value).at(0);
        if (t < 1) throw ConfigError("threads must be >= 1");
        cfg.threads = static_cast<unsigned>(t);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    }
  }
  if (!have_scenario) throw ConfigError("missing key 'scenario'");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Throws ConfigError on empty grids or a scenario/regime mismatch.
inline void validate(const ExperimentConfig& cfg) {
  if (cfg.pairs.empty()) {
    if (cfg.p_grid.empty()) throw ConfigError("p_grid is empty");
    if (cfg.scenario != Scenario::FirstOrder && cfg.s_grid.empty()) throw ConfigError("s_grid is empty");
  }
  if (cfg.corpus_size < 0) throw ConfigError("corpus_size must be >= 0");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  const bool counterex = cfg.scenario == Scenario::Prop41 || cfg.scenario == Scenario::Prop42;
  if (counterex) {
    if (cfg.j_list.empty()) throw ConfigError("j_list is empty");
    for (int j : cfg.j_list)
      if (j < 1) throw ConfigError("j_list entries must be >= 1");
  }

  Regime want = Regime::Super;
  switch (cfg.scenario) {
    case Scenario::Prop41: want = Regime::Sub; break;
    case Scenario::Prop42: want = Regime::Critical; break;
    case Scenario::Thm31:
    case Scenario::Prop32: want = Regime::Super; break;
    case Scenario::FirstOrder: want = Regime::FirstOrder; break;
  }
  for (auto [s, p] : cfg.param_pairs()) {
    Regime got;
    try {
      got = SobolevParams(s, p).regime();
    } catch (const Error& e) {
      throw ConfigError(std::string("bad (s, p): ") + e.what());
    }
    if (got != want) {
      throw ConfigError(std::string(to_string(cfg.scenario)) + " needs " + to_string(want) + " pairs, got s=" +
                        format_number(s) + " p=" + format_number(p) + " (" + to_string(got) + ")");
    }
  }

  OuterFn f = OuterFn::abs();
  try {
    f = cfg.outer();
  } catch (const Error& e) {
    throw ConfigError(std::string("bad f: ") + e.what());
  }
  if (counterex) {
    if (std::abs(f(cfg.b0) - f(cfg.b1)) > 1e-12 * std::max(1.0, std::abs(f(cfg.b0))))
      throw ConfigError("f must satisfy f(b0) = f(b1)");
  }
  if (cfg.scenario == Scenario::Prop42 && !f.lipschitz()) throw ConfigError("Prop42 needs a Lipschitz f");
  if (cfg.scenario == Scenario::Thm31 && !f.piecewise_affine())
    throw ConfigError("Thm31 needs a piecewise-affine f (square composes only with step functions)");
}

namespace detail {

struct CaseOut {
  std::vector<VerificationReport::Row> rows;
  std::map<std::string, double> summary;
  std::size_t extra_failures = 0;
};

inline std::string pair_key(const std::string& name, double s, double p) {
  return name + "[s=" + format_number(s) + ",p=" + format_number(p) + "]";
}

inline PiecewiseFn corpus_member(const ExperimentConfig& cfg, int k) {
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(k));
  return cfg.corpus_kind() == CorpusKind::SignChanging ? random_sign_changing(rng) : random_continuous_affine(rng);
}

// 64 cell-centred points, skipping any within 1e-9 of a breakpoint.
inline std::vector<double> pointwise_grid(const PiecewiseFn& u, const std::optional<PiecewiseFn>& fu) {
  std::vector<double> grid;
  const Interval d = u.domain();
  auto near = [&](const PiecewiseFn& w, double x) {
    for (double t : w.breakpoints())
      if (std::abs(t - x) < 1e-9 * d.length()) return true;
    return false;
  };
  for (int k = 0; k < 64; ++k) {
    const double x = d.a + d.length() * (k + 0.5) / 64.0;
    if (near(u, x) || (fu && near(*fu, x))) continue;
    grid.push_back(x);
  }
  return grid;
}

}  // namespace detail

// Per-scenario CSV columns (each followed by `pass`):
//   Prop41      s,p,j,seminorm,lower,upper,composed_seminorm
//   Prop42      s,p,j,seminorm,log_lower,composed_seminorm
//   Thm31       s,p,member,cells,lambda,seminorm_u,seminorm_fu,c_required
//   Prop32      s,p,member,cells,osc_seminorm,base_seminorm,ratio
//   FirstOrder  p,member,cells,energy_abs,energy_u,rel_gap,chain_rule,points,flagged,violations
inline VerificationReport run(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto pairs = cfg.param_pairs();
  const OuterFn f = cfg.outer();
  const int members = cfg.corpus_size;

  VerificationReport rep;
  rep.scenario = to_string(cfg.scenario);
  rep.config = cfg.echo();

  std::vector<detail::CaseOut> cases;
  GagliardoOptions gopt;
  gopt.rel_tol = cfg.tol;

  switch (cfg.scenario) {
    case Scenario::Prop41:
    case Scenario::Prop42: {
      const bool p41 = cfg.scenario == Scenario::Prop41;
      rep.columns = p41 ? std::vector<std::string>{"s", "p", "j", "seminorm", "lower", "upper", "composed_seminorm"}
                        : std::vector<std::string>{"s", "p", "j", "seminorm", "log_lower", "composed_seminorm"};
      cases.resize(pairs.size());
      // parallelism goes inside each pair, over j
      for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto [s, p] = pairs[n];
        auto sub = p41 ? verify_prop41(cfg.j_list, s, p, cfg.b0, cfg.b1, f, cfg.threads)
                       : verify_prop42(cfg.j_list, s, p, cfg.b0, cfg.b1, f, cfg.threads);
        std::size_t row_failures = 0;
        for (auto& r : sub.rows) {
          r.values.insert(r.values.begin(), {s, p});
          if (!r.pass) ++row_failures;
          cases[n].rows.push_back(std::move(r));
        }
        cases[n].extra_failures = sub.failures - row_failures;
        for (const auto& [k, v] : sub.summary) cases[n].summary[detail::pair_key(k, s, p)] = v;
      }
      break;
    }
    case Scenario::Thm31: {
      rep.columns = {"s", "p", "member", "cells", "lambda", "seminorm_u", "seminorm_fu", "c_required"};
      cases.resize(pairs.size() * members);
      parallel_for(cases.size(), cfg.threads, [&](std::size_t n) {
        const auto [s, p] = pairs[n / members];
        const int k = static_cast<int>(n % members);
        const SobolevParams params(s, p);
        const auto u = detail::corpus_member(cfg, k);
        const auto lam = lambda_constant(f, u.range_exact());
        const double su = gagliardo(u, params, gopt).value;
        const double sfu = gagliardo(compose(f, u), params, gopt).value;
        double c = std::nan("");
        if (!lam.empty_sup && std::isfinite(lam.value) && sfu > 0.0) c = su / (std::pow(lam.value, p) * sfu);
        const bool pass = std::isfinite(su) && std::isfinite(sfu);
        cases[n].rows.push_back({{s, p, double(k), double(u.cells()), lam.value, su, sfu, c}, pass});
      });
      break;
    }
    case Scenario::Prop32: {
      rep.columns = {"s", "p", "member", "cells", "osc_seminorm", "base_seminorm", "ratio"};
      cases.resize(pairs.size() * members);
      OscOptions oopt;
      oopt.tol = std::max(cfg.tol, 1e-12);
      parallel_for(cases.size(), cfg.threads, [&](std::size_t n) {
        const auto [s, p] = pairs[n / members];
        const int k = static_cast<int>(n % members);
        const auto u = detail::corpus_member(cfg, k);
        const auto r = reverse_oscillation_ratio(u, SobolevParams(s, p), oopt);
        const bool pass = r.osc_seminorm >= r.base_seminorm * (1.0 - 1e-8);
        cases[n].rows.push_back({{s, p, double(k), double(u.cells()), r.osc_seminorm, r.base_seminorm, r.ratio}, pass});
      });
      break;
    }
    case Scenario::FirstOrder: {
      rep.columns = {"p", "member", "cells", "energy_abs", "energy_u", "rel_gap", "chain_rule", "points", "flagged",
                     "violations"};
      cases.resize(pairs.size() * members);
      parallel_for(cases.size(), cfg.threads, [&](std::size_t n) {
        const double p = pairs[n / members].second;
        const int k = static_cast<int>(n % members);
        const auto u = detail::corpus_member(cfg, k);
        const auto [ea, eu] = check_energy_identity(u, p);
        const double gap = std::abs(ea - eu) / std::max(std::abs(eu), 1e-300);
        const bool chain = check_abs_chain_rule(u, 64, cfg.seed ^ static_cast<std::uint64_t>(k));
        std::optional<PiecewiseFn> fu;
        if (f.piecewise_affine()) fu = compose(f, u);
        const auto grid = detail::pointwise_grid(u, fu);
        const auto checks = check_theorem21(u, f, grid);
        int flagged = 0, bad = 0;
        for (const auto& c : checks) {
          flagged += c.flagged;
          bad += !c.pass;
        }
        const bool pass = (eu == 0.0 ? ea == 0.0 : gap <= 1e-12) && chain && bad == 0;
        cases[n].rows.push_back({{p, double(k), double(u.cells()), ea, eu, gap, chain ? 1.0 : 0.0,
                                  double(checks.size()), double(flagged), double(bad)},
                                 pass});
      });
      break;
    }
  }

  for (auto& c : cases) {
    for (auto& r : c.rows) rep.add_row(std::move(r.values), r.pass);
    rep.failures += c.extra_failures;
    for (const auto& [k, v] : c.summary) rep.summary[k] = v;
  }

  // scenario-wide maxima
  auto column_extent = [&](const std::string& col, const std::string& name) {
    double lo = kInf, hi = -kInf;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
      const double v = rep.at(r, col);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo <= hi) {
      rep.summary[name + "_min"] = lo;
      rep.summary[name + "_max"] = hi;
    }
  };
  if (cfg.scenario == Scenario::Thm31) {
    column_extent("c_required", "c_emp");
    column_extent("lambda", "lambda");
  } else if (cfg.scenario == Scenario::Prop32) {
    column_extent("ratio", "ratio");
  } else if (cfg.scenario == Scenario::FirstOrder) {
    column_extent("rel_gap", "rel_gap");
  }
  rep.summary["cases"] = static_cast<double>(rep.rows.size());
  return rep;
}

// SOBREV_OUT_PATH, when set, replaces the configured output path.
inline std::string resolve_out_path(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SOBREV_OUT_PATH"); env && *env) return env;
  return cfg.out_path;
}

// Writes <path> (CSV) and the JSON mirror next to it (.csv replaced by .json).
inline void write_report(const VerificationReport& rep, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error("cannot write " + csv_path.string());
  csv << rep.to_csv();
  auto json_path = csv_path;
  if (json_path.extension() == ".csv") json_path.replace_extension(".json");
  else json_path += ".json";
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw Error("cannot write " + json_path.string());
  js << rep.to_json().dump(2) << '\n';
}

}  // namespace sobrev
