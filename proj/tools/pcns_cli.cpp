// Benchmark harness for the fast-splitting group-testing schemes: design
// inspection, Monte Carlo simulation, analytic comparison, and rate-plot
// data.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcns/pcns.hpp"

namespace {

struct CliOptions {
  std::string scheme = "pcns16";
  std::uint64_t n = 1024;
  std::uint64_t k = 16;
  double epsilon = 0.05;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  bool force_empty = false;
  std::uint64_t budget_prefix = 0;
  std::uint64_t budget_hash = 0;
  unsigned threads = 1;
  bool timing = false;
};

std::pair<pcns::Scheme, pcns::DecoderKind> parse_scheme(const std::string& s) {
  if (s == "comp") return {pcns::Scheme::pcns_comp, pcns::DecoderKind::comp_matrix};
  if (s == "dd") return {pcns::Scheme::pcns_dd, pcns::DecoderKind::dd_matrix};
  auto scheme = pcns::scheme_from_string(s);
  if (!scheme) pcns::fail(pcns::Errc::bad_config, "unknown scheme '" + s + "'");
  return {*scheme, pcns::DecoderKind::native};
}

pcns::ExperimentConfig make_config(const CliOptions& o) {
  pcns::ExperimentConfig cfg;
  auto [scheme, decoder] = parse_scheme(o.scheme);
  cfg.scheme = scheme;
  cfg.decoder = decoder;
  cfg.n = o.n;
  cfg.k = o.k;
  cfg.epsilon = o.epsilon;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.force_empty_infection = o.force_empty;
  if (o.budget_prefix) cfg.budget_prefix = o.budget_prefix;
  if (o.budget_hash) cfg.budget_hash = o.budget_hash;
  cfg.threads = o.threads;
  cfg.measure_time = o.timing;
  return cfg;
}

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--scheme", o.scheme, "pcns16|pcns-comp|pcns-dd|comp|dd");
  cmd->add_option("--n", o.n, "population size (power of two)");
  cmd->add_option("--k", o.k, "defective count (power of two)");
  cmd->add_option("--epsilon", o.epsilon, "rate parameter in (0, 1/8)");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--out", o.out, "output path (default: stdout)");
}

std::ostream& open_out(const CliOptions& o, std::ofstream& file) {
  if (o.out.empty()) return std::cout;
  file.open(o.out, std::ios::binary);
  if (!file) pcns::fail(pcns::Errc::io_error, "cannot open " + o.out);
  return file;
}

void print_summary(const pcns::ExperimentResult& result, std::ostream& os) {
  os << pcns::summary_json(result).dump(2) << '\n';
}

int cmd_design(const CliOptions& o) {
  auto [scheme, decoder] = parse_scheme(o.scheme);
  (void)decoder;
  const pcns::SchemeParams p =
      pcns::validate_params(o.n, o.k, o.epsilon, scheme, o.seed);
  const pcns::DesignLayout layout = pcns::DesignLayout::from(p);
  const pcns::TestCount tc = pcns::test_count(p);
  std::cout << "scheme " << pcns::to_string(p.scheme) << '\n'
            << "n " << p.n << "  k " << p.k << "  epsilon "
            << pcns::format_double(p.epsilon) << "  seed " << p.seed << '\n'
            << "c " << pcns::format_double(p.c) << "  buckets " << p.buckets
            << "  theta " << pcns::format_double(p.theta()) << '\n'
            << "tree levels " << p.phase1_first << ".." << p.phase1_last
            << " (" << layout.phase1_tests << " tests)\n";
  if (p.is_comp_variant())
    std::cout << "label rows 1.." << p.log2k << " (" << layout.phase2_tests
              << " tests)\n";
  else
    std::cout << "dd block " << layout.dd_block_tests << " tests, column weight "
              << p.dd_column_weight << '\n';
  std::cout << "m " << layout.total_tests << '\n'
            << "theorem_estimate " << pcns::format_double(tc.theorem_estimate)
            << '\n'
            << "info_bound " << pcns::format_double(pcns::info_bound(p.n, p.k))
            << '\n'
            << "wa_probability_bound "
            << pcns::format_double(pcns::wa_probability_bound(p)) << '\n'
            << "budgets: prefixes " << p.prefix_budget << ", hashes "
            << p.hash_budget << '\n';
  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) pcns::fail(pcns::Errc::io_error, "cannot open " + o.out);
    pcns::export_matrix(p).write(file);
    std::cout << "matrix written to " << o.out << '\n';
  }
  return 0;
}

int cmd_simulate(const CliOptions& o) {
  const pcns::ExperimentResult result = pcns::run_experiment(make_config(o));
  std::ofstream file;
  std::ostream& os = open_out(o, file);
  if (o.format == "json")
    pcns::write_json(result, os);
  else
    pcns::write_csv(result, os);
  print_summary(result, o.out.empty() ? std::cerr : std::cout);
  return 0;
}

int cmd_analyze(const CliOptions& o) {
  CliOptions opts = o;
  const pcns::AnalysisReport rep = pcns::compare_analytic(make_config(opts));
  std::ofstream file;
  std::ostream& os = open_out(o, file);
  if (o.format == "csv")
    pcns::write_analysis_csv(rep, os);
  else
    pcns::write_analysis_text(rep, os);
  return 0;
}

int cmd_rates(const CliOptions& o) {
  auto [scheme, decoder] = parse_scheme(o.scheme);
  (void)decoder;
  const auto points = pcns::rate_sweep(scheme, o.n, o.epsilon, o.seed);
  std::ofstream file;
  std::ostream& os = open_out(o, file);
  pcns::write_rates_csv(points, os);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fast-splitting group testing benchmark"};
  app.require_subcommand(1);
  CliOptions o;

  CLI::App* design = app.add_subcommand(
      "design", "print the test layout; --out exports the sparse matrix");
  add_common_flags(design, o);

  CLI::App* simulate =
      app.add_subcommand("simulate", "run Monte Carlo trials");
  add_common_flags(simulate, o);
  simulate->add_option("--trials", o.trials, "number of trials");
  simulate->add_option("--format", o.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_flag("--force-empty-infection", o.force_empty,
                     "decode with no defectives");
  simulate->add_option("--budget-prefix", o.budget_prefix,
                       "override the handled-prefix budget");
  simulate->add_option("--budget-hash", o.budget_hash,
                       "override the hash budget");
  simulate->add_option("--threads", o.threads,
                       "worker threads (0 = hardware)");
  simulate->add_flag("--timing", o.timing,
                     "measure per-trial wall time (micros column is then "
                     "run-dependent)");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "compare per-level list sizes against the analysis");
  add_common_flags(analyze, o);
  analyze->add_option("--trials", o.trials, "number of trials");
  analyze->add_option("--format", o.format, "text|csv");
  analyze->add_option("--threads", o.threads, "worker threads");

  CLI::App* rates = app.add_subcommand(
      "rates", "emit tests/(k ln n) versus theta for every valid k");
  add_common_flags(rates, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) return cmd_design(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (analyze->parsed()) return cmd_analyze(o);
    if (rates->parsed()) return cmd_rates(o);
  } catch (const pcns::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
