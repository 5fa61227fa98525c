// mcsum: command-line front end for the column-sum g-inverse library.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 numerical, 4 identity violation.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "mcsum/mcsum.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3, kIdentity = 4 };

int exit_code(mcsum::ErrorKind kind) {
  using K = mcsum::ErrorKind;
  switch (kind) {
    case K::SingularMatrix:
    case K::NoConvergence:
    case K::GenerationFailed:
      return kNumerical;
    default:
      return kValidation;
  }
}

struct InputSpec {
  std::string path;
  std::string format;  // "", "csv" or "json"

  mcsum::TransitionMatrix load() const {
    std::optional<mcsum::io::Format> f;
    if (format == "csv") f = mcsum::io::Format::Csv;
    if (format == "json") f = mcsum::io::Format::Json;
    const auto raw = mcsum::io::read_chain_file(path, f);
    return mcsum::validate(raw.p, raw.labels);
  }
};

void add_input(CLI::App* cmd, InputSpec& in) {
  cmd->add_option("-i,--input", in.path, "Chain file (CSV or JSON)")->required();
  cmd->add_option("--format", in.format, "Override the format inferred from the extension")
      ->check(CLI::IsMember({"csv", "json"}));
}

void print_vector(const char* name, const mcsum::Vector& v) {
  std::printf("%s =", name);
  for (double x : v) std::printf(" %.6f", x);
  std::printf("\n");
}

void print_matrix(const char* name, const mcsum::Matrix& a) {
  std::printf("%s =\n", name);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (double x : a.row(i)) std::printf(" %12.6f", x);
    std::printf("\n");
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mcsum::Error(mcsum::ErrorKind::InvalidArgument, "cannot write " + path);
  out << text;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  InputSpec input;
  bool reorder = false;
  std::string output;
  double tol_identity = 1e-8;
};

int run_analyze(const AnalyzeArgs& args) {
  const auto chain = args.input.load();
  const auto rep = mcsum::analyze(chain, {.reorder = args.reorder});
  if (!args.output.empty()) write_file(args.output, mcsum::io::report_json(rep).dump(2) + "\n");

  if (rep.permutation) {
    std::printf("permutation:");
    for (std::size_t k : *rep.permutation) std::printf(" %zu", k + 1);
    std::printf("\n");
  }
  std::printf("%-8s %12s %12s %12s %14s\n", "state", "c_j", "pi_j", "h_jj", "m*h_jj-pi_j");
  for (std::size_t j = 0; j < rep.m; ++j) {
    std::printf("%-8s %12.6f %12.6f %12.6f %14.6f\n", rep.labels[j].c_str(), rep.column_sums[j],
                rep.stationary[j], rep.h_matrix(j, j), rep.bounds.pi_upper_margin[j]);
  }
  std::printf("K = %.6f  (bound (m+1)/2 = %.6f, margin %.6f)\n", rep.kemeny.value,
              rep.bounds.kemeny_lower, rep.bounds.kemeny_margin);
  std::printf("tr(H) = %.6f  (bound %.6f, margin %.6f)\n", rep.bounds.trace_h,
              rep.bounds.trace_h_lower, rep.bounds.trace_h_margin);
  std::printf("Kemeny variant spread = %.3e\n", rep.kemeny.max_deviation);
  std::printf("max residual = %.3e\n", rep.max_residual());
  if (rep.condition_warning) {
    std::fprintf(stderr, "warning: condition estimate %.3e of I - P + e c^T exceeds 1e8\n",
                 rep.condition_estimate);
  }
  if (rep.max_residual() > args.tol_identity || !rep.bounds.holds()) {
    std::fprintf(stderr, "identity check failed (max residual %.3e)\n", rep.max_residual());
    return kIdentity;
  }
  return kOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  InputSpec input;
  double tol_identity = 1e-8;
  std::optional<double> tol_expected;
  std::string expected;
};

bool report_line(const std::string& name, double value, double tol) {
  const bool ok = value <= tol;
  std::printf("%-52s %12.3e  %s\n", name.c_str(), value, ok ? "PASS" : "FAIL");
  return ok;
}

bool verify_expected(const mcsum::ChainReport& rep, const std::string& path,
                     std::optional<double> tol_expected) {
  const auto doc = nlohmann::json::parse(mcsum::io::read_text(path));
  auto tol_for = [&](const char* key) {
    if (tol_expected) return *tol_expected;
    if (doc.contains(key)) return doc[key].get<double>();
    return doc.value("tolerance", 5e-4);
  };
  auto matrix = [](const nlohmann::json& j) {
    return mcsum::Matrix::from_rows(j.get<std::vector<mcsum::Vector>>());
  };
  bool ok = true;
  if (doc.contains("stationary")) {
    ok &= report_line("expected:stationary",
                      mcsum::max_abs_diff(rep.stationary.pi, doc["stationary"].get<mcsum::Vector>()),
                      tol_for("tolerance"));
  }
  if (doc.contains("column_sums")) {
    ok &= report_line("expected:column_sums",
                      mcsum::max_abs_diff(rep.column_sums.c, doc["column_sums"].get<mcsum::Vector>()),
                      tol_for("tolerance"));
  }
  if (doc.contains("h_matrix")) {
    ok &= report_line("expected:h_matrix", mcsum::max_abs_diff(rep.h_matrix, matrix(doc["h_matrix"])),
                      tol_for("tolerance"));
  }
  if (doc.contains("mfpt")) {
    ok &= report_line("expected:mfpt", mcsum::max_abs_diff(rep.mfpt.mfpt, matrix(doc["mfpt"])),
                      tol_for("mfpt_tolerance"));
  }
  if (doc.contains("kemeny")) {
    ok &= report_line("expected:kemeny", std::abs(rep.kemeny.value - doc["kemeny"].get<double>()),
                      tol_for("kemeny_tolerance"));
  }
  return ok;
}

int run_verify(const VerifyArgs& args) {
  const auto chain = args.input.load();
  const auto rep = mcsum::analyze(chain);
  bool ok = true;
  for (const auto* table : {&rep.structural_residuals, &rep.identity_residuals, &rep.cross_checks}) {
    for (const auto& e : table->entries) ok &= report_line(e.name, e.value, args.tol_identity);
  }
  const auto& b = rep.bounds;
  auto bound_line = [&](const char* name, double margin, bool strict) {
    const bool pass = strict && rep.m > 1 ? margin > 0.0 : margin >= -1e-12;
    std::printf("%-52s %12.3e  %s\n", name, margin, pass ? "PASS" : "FAIL");
    ok &= pass;
  };
  bound_line("bound:kemeny_margin", b.kemeny_margin, false);
  bound_line("bound:trace_h_margin", b.trace_h_margin, false);
  bound_line("bound:trace_h_weak_margin", b.trace_h_weak_margin, true);
  bound_line("bound:pi_upper_margin_min", b.min_pi_upper_margin(), true);
  bound_line("bound:pi_lower_margin_min", b.min_pi_lower_margin(), true);
  bound_line("positivity:min_h_diagonal", rep.positivity.min_h_diagonal, true);
  bound_line("positivity:min_z_diagonal", rep.positivity.min_z_diagonal, true);
  if (rep.m > 1) {
    bound_line("positivity:min_h_diagonal_excess", rep.positivity.min_h_diagonal_excess, true);
    bound_line("positivity:min_z_diagonal_excess", rep.positivity.min_z_diagonal_excess, true);
  }
  if (const auto* ds = std::get_if<mcsum::DoublyStochasticReport>(&rep.doubly_stochastic)) {
    for (const auto& e : ds->residuals.entries)
      ok &= report_line("doubly_stochastic:" + e.name, e.value, args.tol_identity);
    bound_line("doubly_stochastic:row_sum_margin", ds->min_row_sum_margin, false);
  }
  if (!args.expected.empty()) ok &= verify_expected(rep, args.expected, args.tol_expected);
  std::printf("%s\n", ok ? "all checks passed" : "some checks FAILED");
  return ok ? kOk : kIdentity;
}

// ---- scan ------------------------------------------------------------------

std::vector<std::size_t> parse_states(const std::string& text) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw CLI::ValidationError("--states", "bad number '" + s + "'");
    return v;
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
    } else {
      const std::size_t lo = number(part.substr(0, dots)), hi = number(part.substr(dots + 2));
      if (lo > hi) throw CLI::ValidationError("--states", "empty range '" + part + "'");
      for (std::size_t m = lo; m <= hi; ++m) out.push_back(m);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (std::size_t m : out)
    if (m < 2) throw CLI::ValidationError("--states", "state counts must be at least 2");
  return out;
}

struct ScanArgs {
  std::string states = "3";
  std::size_t trials = 1000;
  std::uint64_t seed = 7;
  double sparsity = 0.0;
  std::string log;
  std::size_t threads = 0;
  std::vector<std::string> relations;
  double tol_identity = 1e-8;
};

int run_scan(const ScanArgs& args) {
  mcsum::ScanConfig cfg;
  cfg.state_counts = parse_states(args.states);
  cfg.trials = args.trials;
  cfg.seed = args.seed;
  cfg.sparsity = args.sparsity;
  cfg.relations = args.relations;
  cfg.threads = args.threads;
  cfg.identity_tol = args.tol_identity;
  const auto result = mcsum::scan(cfg);
  std::printf("seed=%llu trials=%zu sparsity=%g\n", static_cast<unsigned long long>(cfg.seed),
              cfg.trials, cfg.sparsity);
  std::fputs(mcsum::io::scan_summary(result).c_str(), stdout);
  if (!args.log.empty()) write_file(args.log, mcsum::io::counterexample_log(result));
  for (const auto& f : result.identity_failures) {
    std::fprintf(stderr, "identity failure: m=%zu trial=%zu %s = %.3e\n", f.m, f.trial,
                 f.what.c_str(), f.value);
  }
  return result.hard_failure() ? kIdentity : kOk;
}

// ---- closed-form -------------------------------------------------------------

void print_pipeline_deviation(const mcsum::Matrix& p, const mcsum::Vector& pi,
                              const mcsum::Matrix& h, const mcsum::Matrix& z,
                              const mcsum::Matrix& mfpt, double kemeny) {
  const auto rep = mcsum::analyze(mcsum::validate(p));
  const double dev = std::max({mcsum::max_abs_diff(rep.stationary.pi, pi),
                               mcsum::max_abs_diff(rep.h_matrix, h), mcsum::max_abs_diff(rep.z_matrix, z),
                               mcsum::max_abs_diff(rep.mfpt.mfpt, mfpt),
                               std::abs(rep.kemeny.value - kemeny)});
  std::printf("max deviation from pipeline = %.3e\n", dev);
}

int run_two_state(double a, double b) {
  const auto f = mcsum::oracle::two_state_closed_form(a, b);
  std::printf("a = %g, b = %g, d = %g\n", f.a, f.b, f.d);
  print_vector("pi", f.pi);
  print_vector("c", f.c);
  print_matrix("M", f.mfpt);
  print_matrix("H", f.h);
  print_matrix("Z", f.z);
  std::printf("K = %.12g\n", f.kemeny);
  print_pipeline_deviation(f.p, f.pi, f.h, f.z, f.mfpt, f.kemeny);
  return kOk;
}

struct ThreeStateArgs {
  double p2 = 0, p3 = 0, q1 = 0, q3 = 0, r1 = 0, r2 = 0;
};

int run_three_state(const ThreeStateArgs& a) {
  const auto f = mcsum::oracle::three_state_closed_form(a.p2, a.p3, a.q1, a.q3, a.r1, a.r2);
  std::printf("Delta = (%g, %g, %g), sum %g; tau = %g\n", f.delta1, f.delta2, f.delta3, f.delta,
              f.tau);
  print_vector("pi", f.pi);
  print_vector("c", f.c);
  print_matrix("M", f.mfpt);
  print_matrix("H", f.h);
  print_matrix("Z", f.z);
  std::printf("K = %.12g\n", f.kemeny);
  std::printf("annihilation residuals: c %.3e, pi %.3e\n", f.annihilation_residual_c,
              f.annihilation_residual_pi);
  print_pipeline_deviation(f.p, f.pi, f.h, f.z, f.mfpt, f.kemeny);
  return kOk;
}

// ---- oracle-check ------------------------------------------------------------

struct OracleArgs {
  InputSpec input;
  std::size_t walks = 2000;
  std::uint64_t seed = 7;
};

int run_oracle_check(const OracleArgs& args) {
  const auto chain = args.input.load();
  const auto rep = mcsum::analyze(chain);
  const auto pi_direct = mcsum::oracle::stationary_direct(chain);
  const auto mfpt_direct = mcsum::oracle::mfpt_direct(chain, pi_direct);
  bool ok = true;
  ok &= report_line("stationary_direct_vs_pipeline", mcsum::max_abs_diff(pi_direct.pi, rep.stationary.pi),
                    1e-10);
  double rel = 0.0;
  for (std::size_t k = 0; k < rep.m * rep.m; ++k) {
    const double ref = mfpt_direct.mfpt.data()[k];
    rel = std::max(rel, std::abs(rep.mfpt.mfpt.data()[k] - ref) / ref);
  }
  ok &= report_line("mfpt_direct_vs_pipeline_relative", rel, 1e-8);
  try {
    const auto pi_power = mcsum::oracle::stationary_power(chain);
    ok &= report_line("stationary_power_vs_direct", mcsum::max_abs_diff(pi_power.pi, pi_direct.pi), 1e-9);
  } catch (const mcsum::Error& e) {
    std::printf("%-52s %12s  SKIP (%s)\n", "stationary_power_vs_direct", "-", e.what());
  }
  if (args.walks > 0) {
    const auto mc = mcsum::oracle::mc_estimate(chain, args.seed, args.walks);
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.m; ++i) {
      for (std::size_t j = 0; j < rep.m; ++j) {
        const double se = mc.standard_error(i, j);
        const double diff = std::abs(mc.mfpt(i, j) - rep.mfpt(i, j));
        worst = std::max(worst, se > 0.0 ? diff / se : (diff > 1e-12 ? INFINITY : 0.0));
      }
    }
    std::printf("%-52s %12.3f  %s\n", "monte_carlo_max_standard_errors", worst,
                worst <= 5.0 ? "PASS" : "WARN");
    std::printf("period = %zu%s\n", mc.period,
                mc.stationary_reliable ? "" : " (Monte Carlo stationary estimate unreliable)");
  }
  return ok ? kOk : kIdentity;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MCSUM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && end != env) return v;
  }
  return 7;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Column-sum generalized inverse analysis of finite Markov chains"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Full report for one chain");
  add_input(analyze, analyze_args.input);
  analyze->add_flag("--reorder-by-colsum", analyze_args.reorder, "Sort states by decreasing column sum");
  analyze->add_option("-o,--output", analyze_args.output, "Write the JSON report here");
  analyze->add_option("--tol-identity", analyze_args.tol_identity, "Identity residual tolerance");
  double unused_tol_expected = 5e-4;
  analyze->add_option("--tol-paper", unused_tol_expected, "Accepted for symmetry with verify");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Per-identity residual table");
  add_input(verify, verify_args.input);
  verify->add_option("--tol-identity", verify_args.tol_identity, "Identity residual tolerance");
  verify->add_option("--tol-paper", verify_args.tol_expected, "Tolerance against --expected values");
  verify->add_option("--expected", verify_args.expected, "JSON file of expected printed values")
      ->check(CLI::ExistingFile);

  ScanArgs scan_args;
  scan_args.seed = default_seed();
  auto* scan = app.add_subcommand("scan", "Random-ensemble ordering scan");
  scan->add_option("--states", scan_args.states, "State counts, e.g. 3, 3..8 or 2,4");
  scan->add_option("--trials", scan_args.trials, "Trials per state count")->check(CLI::PositiveNumber);
  scan->add_option("--seed", scan_args.seed, "Master seed (default $MCSUM_SEED or 7)");
  scan->add_option("--sparsity", scan_args.sparsity, "Expected zero fraction")->check(CLI::Range(0.0, 0.8));
  scan->add_option("--log", scan_args.log, "Counterexample log (JSON lines)");
  scan->add_option("--threads", scan_args.threads, "Worker threads (0 = all cores)");
  scan->add_option("--relations", scan_args.relations, "Subset of relations to tally")
      ->check(CLI::IsMember(mcsum::relation::all()));
  scan->add_option("--tol-identity", scan_args.tol_identity, "Identity residual tolerance");

  auto* closed = app.add_subcommand("closed-form", "Closed forms for two- and three-state chains");
  closed->require_subcommand(1);
  double a = 0.5, b = 0.5;
  auto* two = closed->add_subcommand("two-state", "P = [[1-a, a], [b, 1-b]]");
  two->add_option("--a", a, "P(1 -> 2)")->required();
  two->add_option("--b", b, "P(2 -> 1)")->required();
  ThreeStateArgs three_args;
  auto* three = closed->add_subcommand("three-state",
                                       "P = [[1-p2-p3, p2, p3], [q1, 1-q1-q3, q3], [r1, r2, 1-r1-r2]]");
  three->add_option("--p2", three_args.p2, "P(1 -> 2)");
  three->add_option("--p3", three_args.p3, "P(1 -> 3)");
  three->add_option("--q1", three_args.q1, "P(2 -> 1)");
  three->add_option("--q3", three_args.q3, "P(2 -> 3)");
  three->add_option("--r1", three_args.r1, "P(3 -> 1)");
  three->add_option("--r2", three_args.r2, "P(3 -> 2)");

  OracleArgs oracle_args;
  oracle_args.seed = default_seed();
  auto* oracle = app.add_subcommand("oracle-check", "Compare the pipeline with the independent solvers");
  add_input(oracle, oracle_args.input);
  oracle->add_option("--walks", oracle_args.walks, "Monte Carlo walks per pair (0 to skip)");
  oracle->add_option("--seed", oracle_args.seed, "Monte Carlo seed (default $MCSUM_SEED or 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*analyze) return run_analyze(analyze_args);
    if (*verify) return run_verify(verify_args);
    if (*scan) return run_scan(scan_args);
    if (*two) return run_two_state(a, b);
    if (*three) return run_three_state(three_args);
    if (*oracle) return run_oracle_check(oracle_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const mcsum::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ParseError: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}
