#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sobrev/harness.hpp"

using namespace sobrev;

namespace {

// Full function string, or a preset square:j,b0,b1 / ramp:j,b0,b1.
PiecewiseFn fn_from_arg(const std::string& text) {
  for (const char* preset : {"square:", "ramp:"}) {
    const std::string_view tag(preset);
    if (text.rfind(tag, 0) != 0) continue;
    const auto args = parse_number_list(std::string_view(text).substr(tag.size()));
    if (args.size() != 3 || args[0] < 1 || args[0] != static_cast<int>(args[0]))
      throw ParseError(std::string(preset) + " takes j,b0,b1");
    const int j = static_cast<int>(args[0]);
    return tag == "square:" ? square_wave(j, args[1], args[2]) : ramp_rescale(j, args[1], args[2]);
  }
  return parse_fn(text);
}

void print_summary(const VerificationReport& rep) {
  for (const auto& [k, v] : rep.summary) std::cout << k << " = " << format_number(v) << '\n';
  std::cout << "failures = " << rep.failures << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Sobolev seminorms of piecewise-affine functions"};
  app.require_subcommand(1);
  int status = 0;

  std::string fn_text, f_text = "abs", out_path, config_path, method = "exact";
  double s = 0.5, p = 2.0, z = 0.0, tol = 1e-9, b0 = -1.0, b1 = 1.0;
  std::string prop;
  int jmax = 64;
  unsigned threads = 1;
  std::vector<double> range;

  auto* sem = app.add_subcommand("seminorm", "Gagliardo seminorm of a function");
  sem->add_option("--fn", fn_text, "function string or preset square:j,b0,b1 / ramp:j,b0,b1")->required();
  sem->add_option("--s", s)->required();
  sem->add_option("--p", p)->required();
  sem->add_option("--method", method, "exact (closed form where available) or quad")
      ->check(CLI::IsMember({"exact", "quad"}));
  sem->add_option("--tol", tol, "quadrature tolerance");
  sem->callback([&] {
    const auto u = fn_from_arg(fn_text);
    const SobolevParams params(s, p);
    const auto r = method == "quad" ? gagliardo_quad(u, params, tol) : gagliardo(u, params);
    std::cout << "value,method,err\n"
              << format_number(r.value) << ',' << to_string(r.method) << ',' << format_number(r.err_estimate) << '\n';
    if (r.witness) std::cerr << "divergent pair: cells " << r.witness->first_cell << ", " << r.witness->second_cell << '\n';
    if (r.suspected_divergence) std::cerr << "warning: quadrature suspects divergence\n";
  });

  auto* lam = app.add_subcommand("lambda", "Amplification constant of f on a range");
  lam->add_option("--f", f_text, "outer function")->required();
  auto* range_opt = lam->add_option("--range", range, "lo,hi[,lo,hi...] components")->delimiter(',');
  auto* lam_fn = lam->add_option("--fn", fn_text, "take the range of this function");
  range_opt->excludes(lam_fn);
  lam->callback([&] {
    const auto f = parse_outer(f_text);
    RangeSet set;
    if (!fn_text.empty()) {
      set = fn_from_arg(fn_text).range_exact();
    } else {
      if (range.empty() || range.size() % 2 != 0) throw UsageError("--range takes pairs lo,hi");
      std::vector<ClosedRange> parts;
      for (std::size_t i = 0; i < range.size(); i += 2) parts.push_back({range[i], range[i + 1]});
      set = RangeSet::from_pieces(parts, 0.0);
    }
    const auto r = lambda_constant(f, set);
    std::cout << "lambda,empty_sup\n" << format_number(r.value) << ',' << (r.empty_sup ? "true" : "false") << '\n';
  });

  auto* ls = app.add_subcommand("limsup", "Local amplification factor of f at z");
  ls->add_option("--f", f_text)->required();
  ls->add_option("--z", z)->required();
  ls->callback([&] {
    const auto r = limsup_factor(parse_outer(f_text), z);
    std::cout << "limsup,stabilized\n" << format_number(r.value) << ',' << (r.stabilized ? "true" : "false") << '\n';
  });

  auto* osc = app.add_subcommand("osc", "Oscillation seminorm and its ratio to the seminorm");
  osc->add_option("--fn", fn_text)->required();
  osc->add_option("--s", s)->required();
  osc->add_option("--p", p)->required();
  osc->callback([&] {
    const auto r = reverse_oscillation_ratio(fn_from_arg(fn_text), SobolevParams(s, p));
    std::cout << "osc_seminorm,base_seminorm,ratio\n"
              << format_number(r.osc_seminorm) << ',' << format_number(r.base_seminorm) << ','
              << format_number(r.ratio) << '\n';
  });

  auto* cx = app.add_subcommand("counterexample", "Counterexample families and their bounds");
  cx->add_option("--prop", prop, "4.1 (square waves) or 4.2 (rescaled ramps)")
      ->required()
      ->check(CLI::IsMember({"4.1", "4.2"}));
  cx->add_option("--s", s)->required();
  cx->add_option("--p", p)->required();
  cx->add_option("--jmax", jmax, "largest j (all j from 1)")->check(CLI::Range(1, 4096));
  cx->add_option("--b0", b0);
  cx->add_option("--b1", b1);
  auto* cx_f = cx->add_option("--f", f_text, "collapsing outer function");
  cx->add_option("--out", out_path, "CSV path; a .json mirror is written next to it");
  cx->add_option("--threads", threads)->check(CLI::PositiveNumber);
  cx->callback([&] {
    std::vector<int> js;
    for (int j = 1; j <= jmax; ++j) js.push_back(j);
    std::optional<OuterFn> f;
    if (cx_f->count()) f = parse_outer(f_text);
    const auto rep = prop == "4.1" ? verify_prop41(js, s, p, b0, b1, f, threads)
                                   : verify_prop42(js, s, p, b0, b1, f ? *f : OuterFn::abs(), threads);
    if (out_path.empty()) std::cout << rep.to_csv();
    else write_report(rep, out_path);
    print_summary(rep);
    if (rep.failures) status = 1;
  });

  auto* fo = app.add_subcommand("first-order", "First-order identities and pointwise reverse inequality");
  fo->add_option("--fn", fn_text)->required();
  fo->add_option("--f", f_text, "outer function for the pointwise check");
  fo->add_option("--p", p)->required();
  fo->callback([&] {
    const auto u = fn_from_arg(fn_text);
    const auto f = parse_outer(f_text);
    const auto [ea, eu] = check_energy_identity(u, p);
    const bool chain = check_abs_chain_rule(u, 256);
    std::optional<PiecewiseFn> fu;
    if (f.piecewise_affine()) fu = compose(f, u);
    const auto checks = check_theorem21(u, f, detail::pointwise_grid(u, fu));
    int flagged = 0, bad = 0;
    for (const auto& c : checks) {
      flagged += c.flagged;
      bad += !c.pass;
    }
    std::cout << "energy_abs,energy_u,chain_rule,points,flagged,violations\n"
              << format_number(ea) << ',' << format_number(eu) << ',' << (chain ? "true" : "false") << ','
              << checks.size() << ',' << flagged << ',' << bad << '\n';
    const bool energy_ok = std::abs(ea - eu) <= 1e-12 * std::max(std::abs(eu), 1e-300) || ea == eu;
    if (!energy_ok || !chain || bad) status = 1;
  });

  auto* rn = app.add_subcommand("run", "Run an experiment config");
  rn->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  auto* rn_threads = rn->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  rn->callback([&] {
    auto cfg = load_config(config_path);
    if (rn_threads->count()) cfg.threads = threads;
    const auto rep = run(cfg);
    const auto path = resolve_out_path(cfg);
    if (path.empty()) std::cout << rep.to_csv();
    else write_report(rep, path);
    print_summary(rep);
    if (rep.failures) status = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return status;
}
