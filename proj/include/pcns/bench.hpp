#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pcns/analysis.hpp"
#include "pcns/core.hpp"
#include "pcns/decode.hpp"
#include "pcns/design.hpp"
#include "pcns/error.hpp"
#include "pcns/outcomes.hpp"

namespace pcns {

// Which decoder consumes the outcomes: the scheme's own sublinear decoder,
// or a classical baseline run on the exported matrix.
enum class DecoderKind { native, comp_matrix, dd_matrix };

inline constexpr std::string_view to_string(DecoderKind d) noexcept {
  switch (d) {
    case DecoderKind::native: return "native";
    case DecoderKind::comp_matrix: return "comp";
    case DecoderKind::dd_matrix: return "dd";
  }
  return "?";
}

struct ExperimentConfig {
  Scheme scheme = Scheme::pcns16;
  DecoderKind decoder = DecoderKind::native;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double epsilon = 0.05;
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  bool force_empty_infection = false;
  std::optional<std::uint64_t> budget_prefix;
  std::optional<std::uint64_t> budget_hash;
  unsigned threads = 1;      // 0 = hardware concurrency
  bool measure_time = false; // off by default so outputs stay byte-stable
};

struct TrialRecord {
  std::uint64_t trial = 0;
  TrialStatus status = TrialStatus::exact;
  std::uint64_t false_positives = 0;
  std::uint64_t false_negatives = 0;
  std::int64_t excess = 0;  // |final W_p| - k
  OpCounters counters;
  std::uint64_t micros = 0;
  std::vector<std::int64_t> level_excess;  // in-memory only, not serialized
};

struct ExperimentSummary {
  std::uint64_t trials = 0;
  std::uint64_t exact = 0;
  std::uint64_t wa_false_positive = 0;
  std::uint64_t wa_false_negative = 0;
  std::uint64_t tle = 0;
  std::uint64_t total_false_positives = 0;
  std::uint64_t total_false_negatives = 0;
  double wa_rate = 0.0;
  double tle_rate = 0.0;
  double mean_excess = 0.0;
  std::int64_t max_excess = 0;
  double mean_handled = 0.0;
  double mean_hashes = 0.0;
  double mean_queries = 0.0;
  double mean_micros = 0.0;
  std::uint64_t tests = 0;
  double theorem_estimate = 0.0;
  double wa_bound = 0.0;
  double info_tests = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  SchemeParams params;
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

namespace detail {

inline SchemeParams params_for(const ExperimentConfig& cfg) {
  SchemeParams p =
      validate_params(cfg.n, cfg.k, cfg.epsilon, cfg.scheme, cfg.seed);
  if (cfg.budget_prefix) p.prefix_budget = *cfg.budget_prefix;
  if (cfg.budget_hash) p.hash_budget = *cfg.budget_hash;
  return p;
}

struct MatrixContext {
  SparseMatrix matrix;
  std::vector<std::vector<std::uint32_t>> col_rows;
};

inline MatrixContext make_matrix_context(const SchemeParams& p) {
  MatrixContext ctx;
  ctx.matrix = export_matrix(p);
  ctx.col_rows.resize(ctx.matrix.cols);
  for (std::uint64_t r = 0; r < ctx.matrix.rows; ++r)
    for (std::uint32_t j : ctx.matrix.row_cols[r])
      ctx.col_rows[j].push_back(static_cast<std::uint32_t>(r));
  return ctx;
}

inline TrialRecord run_one_trial(const SchemeParams& p,
                                 const ExperimentConfig& cfg,
                                 const MatrixContext* matrix,
                                 std::uint64_t trial) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t tseed = derive_trial_seed(cfg.seed, trial);
  const InfectionVector truth = cfg.force_empty_infection
                                    ? InfectionVector{}
                                    : sample_infection(p, tseed);
  DecodeReport report;
  if (cfg.decoder == DecoderKind::native) {
    const OutcomeTable table = simulate_outcomes(p, truth);
    report = decode(p, table);
  } else {
    std::vector<std::uint8_t> y(matrix->matrix.rows, 0);
    for (std::uint64_t label : truth.labels)
      for (std::uint32_t r : matrix->col_rows[label]) y[r] = 1;
    report.declared = cfg.decoder == DecoderKind::comp_matrix
                          ? comp_baseline(matrix->matrix, y)
                          : dd_baseline(matrix->matrix, y, p.k);
    report.final_list_excess = static_cast<std::int64_t>(report.declared.size()) -
                               static_cast<std::int64_t>(p.k);
  }
  classify(report, truth);

  TrialRecord rec;
  rec.trial = trial;
  rec.status = report.status;
  rec.false_positives = report.false_positives;
  rec.false_negatives = report.false_negatives;
  rec.excess = report.final_list_excess;
  rec.counters = report.counters;
  rec.level_excess = std::move(report.level_excess);
  if (cfg.measure_time) {
    rec.micros = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
  }
  return rec;
}

inline ExperimentSummary summarize(const SchemeParams& p,
                                   const std::vector<TrialRecord>& records) {
  ExperimentSummary s;
  s.trials = records.size();
  if (!records.empty()) s.max_excess = records.front().excess;
  for (const TrialRecord& r : records) {
    switch (r.status) {
      case TrialStatus::exact: ++s.exact; break;
      case TrialStatus::wa_false_positive: ++s.wa_false_positive; break;
      case TrialStatus::wa_false_negative: ++s.wa_false_negative; break;
      case TrialStatus::tle: ++s.tle; break;
    }
    s.total_false_positives += r.false_positives;
    s.total_false_negatives += r.false_negatives;
    s.mean_excess += static_cast<double>(r.excess);
    s.max_excess = std::max(s.max_excess, r.excess);
    s.mean_handled += static_cast<double>(r.counters.prefix_handled);
    s.mean_hashes += static_cast<double>(r.counters.hashes);
    s.mean_queries += static_cast<double>(r.counters.queries);
    s.mean_micros += static_cast<double>(r.micros);
  }
  if (s.trials > 0) {
    const auto dn = static_cast<double>(s.trials);
    s.wa_rate =
        static_cast<double>(s.wa_false_positive + s.wa_false_negative) / dn;
    s.tle_rate = static_cast<double>(s.tle) / dn;
    s.mean_excess /= dn;
    s.mean_handled /= dn;
    s.mean_hashes /= dn;
    s.mean_queries /= dn;
    s.mean_micros /= dn;
  }
  const TestCount tc = test_count(p);
  s.tests = tc.constructed;
  s.theorem_estimate = tc.theorem_estimate;
  s.wa_bound = wa_probability_bound(p);
  s.info_tests = info_bound(p.n, p.k);
  return s;
}

}  // namespace detail

// Monte Carlo driver.  Trials are independent work units with per-trial
// seeds, so any thread count produces the same records in the same order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) fail(Errc::bad_config, "trials must be >= 1");
  ExperimentResult result;
  result.config = cfg;
  result.params = detail::params_for(cfg);

  std::optional<detail::MatrixContext> matrix;
  if (cfg.decoder != DecoderKind::native)
    matrix = detail::make_matrix_context(result.params);
  const detail::MatrixContext* mctx = matrix ? &*matrix : nullptr;

  result.records.resize(cfg.trials);
  unsigned threads = cfg.threads == 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : cfg.threads;
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, cfg.trials));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < cfg.trials; ++i)
      result.records[i] = detail::run_one_trial(result.params, cfg, mctx, i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t i = w; i < cfg.trials; i += threads)
          result.records[i] =
              detail::run_one_trial(result.params, cfg, mctx, i);
      });
    }
    for (auto& th : pool) th.join();
  }
  result.summary = detail::summarize(result.params, result.records);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization.  Formats are frozen; keep them byte-stable.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr std::string_view kCsvHeader =
    "trial,status,fp,fn,excess,hashes,prefixes,queries,micros";

inline void write_csv(const ExperimentResult& result, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const TrialRecord& r : result.records) {
    os << r.trial << ',' << to_string(r.status) << ',' << r.false_positives
       << ',' << r.false_negatives << ',' << r.excess << ','
       << r.counters.hashes << ',' << r.counters.prefix_handled << ','
       << r.counters.queries << ',' << r.micros << '\n';
  }
}

inline nlohmann::ordered_json summary_json(const ExperimentResult& result) {
  const ExperimentSummary& s = result.summary;
  nlohmann::ordered_json j;
  j["trials"] = s.trials;
  j["exact"] = s.exact;
  j["wa_false_positive"] = s.wa_false_positive;
  j["wa_false_negative"] = s.wa_false_negative;
  j["tle"] = s.tle;
  j["total_false_positives"] = s.total_false_positives;
  j["total_false_negatives"] = s.total_false_negatives;
  j["wa_rate"] = s.wa_rate;
  j["tle_rate"] = s.tle_rate;
  j["mean_excess"] = s.mean_excess;
  j["max_excess"] = s.max_excess;
  j["mean_handled_prefixes"] = s.mean_handled;
  j["mean_hashes"] = s.mean_hashes;
  j["mean_queries"] = s.mean_queries;
  j["mean_micros"] = s.mean_micros;
  j["tests"] = s.tests;
  j["theorem_estimate"] = s.theorem_estimate;
  j["wa_probability_bound"] = s.wa_bound;
  j["info_bound_tests"] = s.info_tests;
  return j;
}

inline void write_json(const ExperimentResult& result, std::ostream& os) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"scheme", std::string(to_string(result.config.scheme))},
      {"decoder", std::string(to_string(result.config.decoder))},
      {"n", result.config.n},
      {"k", result.config.k},
      {"epsilon", result.config.epsilon},
      {"trials", result.config.trials},
      {"seed", result.config.seed},
      {"force_empty_infection", result.config.force_empty_infection},
  };
  j["summary"] = summary_json(result);
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const TrialRecord& r : result.records) {
    recs.push_back({{"trial", r.trial},
                    {"status", std::string(to_string(r.status))},
                    {"fp", r.false_positives},
                    {"fn", r.false_negatives},
                    {"excess", r.excess},
                    {"hashes", r.counters.hashes},
                    {"prefixes", r.counters.prefix_handled},
                    {"queries", r.counters.queries},
                    {"micros", r.micros}});
  }
  j["records"] = std::move(recs);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Analytic-vs-empirical comparison.
// ---------------------------------------------------------------------------

struct LevelComparison {
  unsigned level = 0;
  double emp_mean_excess = 0.0;
  double emp_stderr = 0.0;
  double recurrence_mean = 0.0;
  double threshold = 0.0;
  double emp_tail_freq = 0.0;
  double chernoff_log = 0.0;  // ln of the tail bound at this level
  bool chernoff_vacuous = false;
};

struct AnalysisReport {
  SchemeParams params;
  std::uint64_t trials = 0;
  std::vector<LevelComparison> rows;
  double handled_mean_emp = 0.0;
  double handled_mean_pred = 0.0;  // sum over levels of (k + recurrence mean)
  double handled_paper_cap = 0.0;  // (1 + mean total progeny) * k * levels
};

inline AnalysisReport compare_analytic(const ExperimentConfig& cfg) {
  if (cfg.decoder != DecoderKind::native)
    fail(Errc::bad_config, "analysis requires the native decoder");
  ExperimentResult res = run_experiment(cfg);
  const SchemeParams& p = res.params;
  const BranchingLaw law = p.scheme == Scheme::pcns16
                               ? BranchingLaw::pcns16()
                               : BranchingLaw::comp(p.epsilon);
  const double threshold =
      p.scheme == Scheme::pcns16
          ? 5.0 * static_cast<double>(p.k)
          : 2.0 * static_cast<double>(p.k) / p.epsilon;

  AnalysisReport rep;
  rep.params = p;
  rep.trials = res.records.size();
  const unsigned levels = p.phase1_level_count();
  std::vector<double> sum(levels, 0.0), sum2(levels, 0.0);
  std::vector<std::uint64_t> tail(levels, 0);
  for (const TrialRecord& r : res.records) {
    for (unsigned i = 0; i < levels && i < r.level_excess.size(); ++i) {
      const auto x = static_cast<double>(r.level_excess[i]);
      sum[i] += x;
      sum2[i] += x * x;
      if (x >= threshold) ++tail[i];
    }
  }
  const auto dn = static_cast<double>(rep.trials);
  for (unsigned i = 0; i < levels; ++i) {
    LevelComparison row;
    row.level = p.phase1_first + i;
    row.emp_mean_excess = sum[i] / dn;
    const double var =
        std::max(0.0, sum2[i] / dn - row.emp_mean_excess * row.emp_mean_excess);
    row.emp_stderr = std::sqrt(var / dn);
    row.recurrence_mean = F_mean(law, p.k, i + 1);
    row.threshold = threshold;
    row.emp_tail_freq = static_cast<double>(tail[i]) / dn;
    const TailBound b = chernoff_excess_bound(law, p.k, i + 1);
    row.chernoff_log = b.log_value;
    row.chernoff_vacuous = b.vacuous;
    rep.rows.push_back(row);
  }
  rep.handled_mean_emp = res.summary.mean_handled;
  double pred = 0.0;
  for (unsigned i = 0; i < levels; ++i)
    pred += static_cast<double>(p.k) + F_mean(law, p.k, i + 1);
  rep.handled_mean_pred = pred;
  rep.handled_paper_cap = (1.0 + h_inf_mean(law)) * static_cast<double>(p.k) *
                          static_cast<double>(levels);
  return rep;
}

inline void write_analysis_csv(const AnalysisReport& rep, std::ostream& os) {
  os << "level,emp_mean_excess,emp_stderr,recurrence_mean,threshold,"
        "emp_tail_freq,chernoff_log,chernoff_vacuous\n";
  for (const LevelComparison& r : rep.rows) {
    os << r.level << ',' << format_double(r.emp_mean_excess) << ','
       << format_double(r.emp_stderr) << ',' << format_double(r.recurrence_mean)
       << ',' << format_double(r.threshold) << ','
       << format_double(r.emp_tail_freq) << ',' << format_double(r.chernoff_log)
       << ',' << (r.chernoff_vacuous ? 1 : 0) << '\n';
  }
}

inline void write_analysis_text(const AnalysisReport& rep, std::ostream& os) {
  os << "scheme " << to_string(rep.params.scheme) << "  n " << rep.params.n
     << "  k " << rep.params.k << "  epsilon "
     << format_double(rep.params.epsilon) << "  trials " << rep.trials << '\n';
  os << "level  emp_mean  recurrence  tail_freq(N>="
     << format_double(rep.rows.empty() ? 0.0 : rep.rows.front().threshold)
     << ")  ln_chernoff\n";
  for (const LevelComparison& r : rep.rows) {
    os << r.level << "  " << format_double(r.emp_mean_excess) << " (se "
       << format_double(r.emp_stderr) << ")  "
       << format_double(r.recurrence_mean) << "  "
       << format_double(r.emp_tail_freq) << "  "
       << format_double(r.chernoff_log)
       << (r.chernoff_vacuous ? " (vacuous)" : "") << '\n';
  }
  os << "handled prefixes: empirical mean " << format_double(rep.handled_mean_emp)
     << ", recurrence prediction " << format_double(rep.handled_mean_pred)
     << ", asymptotic cap " << format_double(rep.handled_paper_cap) << '\n';
}

// ---------------------------------------------------------------------------
// Rate points for the tests-vs-sparsity plot.
// ---------------------------------------------------------------------------

struct RatePoint {
  Scheme scheme = Scheme::pcns16;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double theta = 0.0;
  double tests_per_k_ln_n = 0.0;
  double comp_ref = 0.0;  // 1/ln(2)^2, the COMP rate line
  double info_ref = 0.0;  // counting bound, same normalization
};

inline RatePoint rate_point(const SchemeParams& p) {
  RatePoint r;
  r.scheme = p.scheme;
  r.n = p.n;
  r.k = p.k;
  r.theta = p.theta();
  const double k_ln_n =
      static_cast<double>(p.k) * std::log(static_cast<double>(p.n));
  r.tests_per_k_ln_n =
      static_cast<double>(test_count(p).constructed) / k_ln_n;
  const double ln2 = std::log(2.0);
  r.comp_ref = 1.0 / (ln2 * ln2);
  r.info_ref = info_bound(p.n, p.k) / k_ln_n;
  return r;
}

// One point per valid power-of-two k for the given n.
inline std::vector<RatePoint> rate_sweep(Scheme scheme, std::uint64_t n,
                                         double epsilon, std::uint64_t seed) {
  std::vector<RatePoint> out;
  for (std::uint64_t k = 4; k <= n / 4; k *= 2) {
    if (scheme == Scheme::pcns_dd && k * k >= n) break;
    out.push_back(rate_point(validate_params(n, k, epsilon, scheme, seed)));
  }
  return out;
}

inline void write_rates_csv(const std::vector<RatePoint>& points,
                            std::ostream& os) {
  os << "scheme,n,k,theta,tests_per_k_ln_n,comp_ref,info_ref\n";
  for (const RatePoint& r : points) {
    os << to_string(r.scheme) << ',' << r.n << ',' << r.k << ','
       << format_double(r.theta) << ',' << format_double(r.tests_per_k_ln_n)
       << ',' << format_double(r.comp_ref) << ',' << format_double(r.info_ref)
       << '\n';
  }
}

}  // namespace pcns
