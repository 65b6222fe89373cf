#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pcns/bench.hpp"
#include "pcns/decode.hpp"

using namespace pcns;

namespace {

std::vector<std::uint64_t> watchlist_labels(const std::vector<Prefix>& wp) {
  std::vector<std::uint64_t> out;
  for (Prefix q : wp) out.push_back(q.value);
  return out;
}

bool subset(const std::vector<std::uint64_t>& inner,
            const std::vector<std::uint64_t>& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace

TEST_CASE("grow-and-prune matches the matrix replay oracle", "[decode]") {
  for (Scheme s : {Scheme::pcns16, Scheme::pcns_comp}) {
    const SchemeParams p = validate_params(1 << 12, 16, 0.05, s, 31);
    const SparseMatrix m = export_matrix(p);
    const DesignLayout layout = DesignLayout::from(p);
    const testing::ReplayOracle oracle(p, layout, m);
    for (std::uint64_t t = 0; t < 50; ++t) {
      const InfectionVector x = sample_infection(p, derive_trial_seed(31, t));
      const OutcomeTable table = simulate_outcomes(p, x);
      OpCounters ops;
      const Phase1Result fast = grow_and_prune(p, table, p.phase1_last, ops);
      REQUIRE_FALSE(fast.tle);
      const auto replay = oracle.grow(m.or_product(x), p.phase1_last);
      REQUIRE(fast.survivors == replay.survivors);
      REQUIRE(fast.grown_excess == replay.grown_excess);
    }
  }
}

TEST_CASE("grow-and-prune replay agrees at the DD stop level", "[decode]") {
  const SchemeParams p = validate_params(1 << 12, 8, 0.05, Scheme::pcns_dd, 37);
  const SparseMatrix m = export_matrix(p);
  const DesignLayout layout = DesignLayout::from(p);
  const testing::ReplayOracle oracle(p, layout, m);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const InfectionVector x = sample_infection(p, derive_trial_seed(37, t));
    const OutcomeTable table = simulate_outcomes(p, x);
    OpCounters ops;
    const Phase1Result fast = grow_and_prune(p, table, p.phase1_last, ops);
    const auto replay = oracle.grow(m.or_product(x), p.phase1_last);
    REQUIRE(fast.survivors == replay.survivors);
    REQUIRE(fast.grown_excess == replay.grown_excess);
  }
}

TEST_CASE("empty infection prunes everything at the first level", "[decode]") {
  const SchemeParams p = validate_params(1024, 16, 0.05, Scheme::pcns16, 41);
  const OutcomeTable table = simulate_outcomes(p, InfectionVector{});
  OpCounters ops;
  const Phase1Result r = grow_and_prune(p, table, p.phase1_last, ops);
  REQUIRE_FALSE(r.tle);
  CHECK(r.survivors.empty());
  REQUIRE(r.grown_excess.front() == static_cast<std::int64_t>(p.k));
  // after the first level nothing survives, so later grown lists are empty
  for (std::size_t i = 1; i < r.grown_excess.size(); ++i)
    CHECK(r.grown_excess[i] == -static_cast<std::int64_t>(p.k));
  CHECK(ops.prefix_handled == 2 * p.k);
}

TEST_CASE("infected prefixes always survive the tree walk", "[decode]") {
  for (Scheme s : {Scheme::pcns16, Scheme::pcns_comp, Scheme::pcns_dd}) {
    const SchemeParams p = validate_params(1 << 12, 16, 0.05, s,
                                           s == Scheme::pcns_dd ? 43 : 47);
    if (s == Scheme::pcns_dd && p.k * p.k >= p.n) continue;
    for (std::uint64_t t = 0; t < 40; ++t) {
      const InfectionVector x = sample_infection(p, derive_trial_seed(7, t));
      const OutcomeTable table = simulate_outcomes(p, x);
      OpCounters ops;
      const Phase1Result r = grow_and_prune(p, table, p.phase1_last, ops);
      REQUIRE_FALSE(r.tle);
      std::set<std::pair<unsigned, std::uint64_t>> survivors;
      for (Prefix q : r.survivors) survivors.insert({q.length, q.value});
      for (std::uint64_t label : x.labels) {
        const Prefix pre = Prefix::of_label(label, p.log2n, p.phase1_last);
        REQUIRE(survivors.count({pre.length, pre.value}) == 1);
      }
    }
  }
}

TEST_CASE("leaf trimming matches the matrix oracle and keeps the infected",
          "[decode]") {
  const SchemeParams p = validate_params(1 << 12, 16, 0.05, Scheme::pcns_comp, 53);
  const SparseMatrix m = export_matrix(p);
  const DesignLayout layout = DesignLayout::from(p);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const InfectionVector x = sample_infection(p, derive_trial_seed(53, t));
    const OutcomeTable table = simulate_outcomes(p, x);
    OpCounters ops;
    const Phase1Result ph1 = grow_and_prune(p, table, p.log2n, ops);
    const auto declared = leaf_trim(p, table, ph1.survivors, ops);
    REQUIRE(declared ==
            testing::leaf_trim_oracle(p, layout, m, m.or_product(x),
                                      ph1.survivors));
    REQUIRE(subset(x.labels, declared));
  }
}

TEST_CASE("leaf trimming the exact infection set returns it", "[decode]") {
  const SchemeParams p = validate_params(1 << 10, 8, 0.05, Scheme::pcns16, 59);
  const InfectionVector x = sample_infection(p, derive_trial_seed(59, 0));
  const OutcomeTable table = simulate_outcomes(p, x);
  std::vector<Prefix> wp;
  for (std::uint64_t label : x.labels) wp.push_back({p.log2n, label});
  OpCounters ops;
  CHECK(leaf_trim(p, table, wp, ops) == x.labels);
}

TEST_CASE("DD finisher matches the set-based oracle", "[decode]") {
  const SchemeParams p = validate_params(1 << 14, 8, 0.05, Scheme::pcns_dd, 61);
  const SparseMatrix m = export_matrix(p);
  const DesignLayout layout = DesignLayout::from(p);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const InfectionVector x = sample_infection(p, derive_trial_seed(61, t));
    const OutcomeTable table = simulate_outcomes(p, x);
    OpCounters ops;
    const Phase1Result ph1 = grow_and_prune(p, table, p.phase1_last, ops);
    const auto declared = dd_finish(p, table, ph1.survivors, ops);
    REQUIRE(declared == testing::dd_oracle_on_watchlist(
                            p, layout, m, m.or_product(x), ph1.survivors));
    REQUIRE(subset(declared, x.labels));
  }
}

TEST_CASE("single infected candidate is declared by the finisher", "[decode]") {
  const SchemeParams p = validate_params(1 << 10, 4, 0.05, Scheme::pcns_dd, 67);
  const InfectionVector x = InfectionVector::from_labels({300}, p);
  const OutcomeTable table = simulate_outcomes(p, x);
  const std::vector<Prefix> wp = {
      Prefix::of_label(300, p.log2n, p.phase1_last)};
  OpCounters ops;
  const auto declared = dd_finish(p, table, wp, ops);
  REQUIRE(declared == std::vector<std::uint64_t>{300});
}

TEST_CASE("full decode classifies cleanly on empty infection", "[decode]") {
  for (Scheme s : {Scheme::pcns16, Scheme::pcns_comp, Scheme::pcns_dd}) {
    const SchemeParams p = validate_params(1 << 10, 8, 0.05, s, 71);
    const OutcomeTable table = simulate_outcomes(p, InfectionVector{});
    DecodeReport r = decode(p, table);
    classify(r, InfectionVector{});
    CHECK(r.declared.empty());
    CHECK(r.status == TrialStatus::exact);
    CHECK(r.false_positives == 0);
    CHECK(r.false_negatives == 0);
  }
}

TEST_CASE("comp variants never lose a defective", "[decode]") {
  for (Scheme s : {Scheme::pcns16, Scheme::pcns_comp}) {
    const SchemeParams p = validate_params(1 << 12, 16, 0.05, s, 73);
    for (std::uint64_t t = 0; t < 100; ++t) {
      const InfectionVector x = sample_infection(p, derive_trial_seed(73, t));
      const OutcomeTable table = simulate_outcomes(p, x);
      DecodeReport r = decode(p, table);
      classify(r, x);
      REQUIRE(r.false_negatives == 0);
      REQUIRE(subset(x.labels, r.declared));
    }
  }
}

TEST_CASE("the DD variant never invents a defective", "[decode]") {
  const SchemeParams p = validate_params(1 << 12, 8, 0.05, Scheme::pcns_dd, 79);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const InfectionVector x = sample_infection(p, derive_trial_seed(79, t));
    const OutcomeTable table = simulate_outcomes(p, x);
    DecodeReport r = decode(p, table);
    classify(r, x);
    REQUIRE(r.false_positives == 0);
    REQUIRE(subset(r.declared, x.labels));
  }
}

TEST_CASE("budget soundness: non-TLE decodes respect both budgets", "[decode]") {
  for (Scheme s : {Scheme::pcns16, Scheme::pcns_comp, Scheme::pcns_dd}) {
    const SchemeParams p = validate_params(1 << 12, 16, 0.05, s, 83);
    if (s == Scheme::pcns_dd && p.k * p.k >= p.n) continue;
    for (std::uint64_t t = 0; t < 50; ++t) {
      const InfectionVector x = sample_infection(p, derive_trial_seed(83, t));
      const OutcomeTable table = simulate_outcomes(p, x);
      const DecodeReport r = decode(p, table);
      if (r.status != TrialStatus::tle) {
        REQUIRE(r.counters.prefix_handled <= p.prefix_budget);
        REQUIRE(r.counters.hashes <= p.hash_budget);
      }
    }
  }
}

TEST_CASE("exhausted budgets produce a TLE status", "[decode]") {
  SchemeParams p = validate_params(1 << 12, 16, 0.05, Scheme::pcns16, 89);
  const InfectionVector x = sample_infection(p, derive_trial_seed(89, 0));
  const OutcomeTable table = simulate_outcomes(p, x);

  SchemeParams starved = p;
  starved.prefix_budget = 1;
  DecodeReport r1 = decode(starved, table);
  classify(r1, x);
  CHECK(r1.status == TrialStatus::tle);
  CHECK(r1.tle);

  SchemeParams hashless = p;
  hashless.hash_budget = 3;
  DecodeReport r2 = decode(hashless, table);
  classify(r2, x);
  CHECK(r2.status == TrialStatus::tle);
}

TEST_CASE("classification counts both error kinds", "[decode]") {
  const SchemeParams p = validate_params(256, 4, 0.05, Scheme::pcns16, 97);
  const InfectionVector truth = InfectionVector::from_labels({1, 2, 3}, p);
  DecodeReport r;
  r.declared = {2, 3, 9};
  classify(r, truth);
  CHECK(r.false_positives == 1);   // 9
  CHECK(r.false_negatives == 1);   // 1
  CHECK(r.status == TrialStatus::wa_false_negative);  // misses dominate
  DecodeReport fp_only;
  fp_only.declared = {1, 2, 3, 9};
  classify(fp_only, truth);
  CHECK(fp_only.status == TrialStatus::wa_false_positive);
}

TEST_CASE("classical COMP baseline behaves on canonical cases", "[decode]") {
  SparseMatrix ident;
  ident.rows = 4;
  ident.cols = 4;
  ident.row_cols = {{0}, {1}, {2}, {3}};
  CHECK(comp_baseline(ident, std::vector<std::uint8_t>{0, 0, 0, 0}).empty());
  CHECK(comp_baseline(ident, std::vector<std::uint8_t>{0, 1, 0, 0}) ==
        std::vector<std::uint64_t>{1});
  CHECK_THROWS_AS(comp_baseline(ident, std::vector<std::uint8_t>{0, 1}), Error);
}

TEST_CASE("classical DD baseline behaves on canonical cases", "[decode]") {
  SparseMatrix m;
  m.rows = 2;
  m.cols = 3;
  m.row_cols = {{0, 1}, {1, 2}};
  // everything positive, no degree-one test after removal: nothing declared
  CHECK(dd_baseline(m, std::vector<std::uint8_t>{1, 1}, 2).empty());

  SparseMatrix priv;
  priv.rows = 3;
  priv.cols = 3;
  priv.row_cols = {{0, 1}, {1, 2}, {0}};  // item 0 has a private test
  CHECK(dd_baseline(priv, std::vector<std::uint8_t>{1, 0, 1}, 1) ==
        std::vector<std::uint64_t>{0});
  CHECK_THROWS_AS(dd_baseline(priv, std::vector<std::uint8_t>{1, 0}, 1), Error);
}

TEST_CASE("baselines bracket the truth on random Bernoulli designs",
          "[decode]") {
  SplitMix64 rng(103);
  for (int rep = 0; rep < 20; ++rep) {
    SparseMatrix m;
    m.rows = 24;
    m.cols = 48;
    m.row_cols.resize(m.rows);
    for (std::uint64_t r = 0; r < m.rows; ++r)
      for (std::uint32_t j = 0; j < m.cols; ++j)
        if (rng.next_unit() < 1.0 / 3.0) m.row_cols[r].push_back(j);
    InfectionVector x;
    while (x.labels.size() < 4) {
      const std::uint64_t v = rng.next_below(m.cols);
      if (!x.contains(v)) {
        x.labels.push_back(v);
        std::sort(x.labels.begin(), x.labels.end());
      }
    }
    const auto y = m.or_product(x);
    const auto comp = comp_baseline(m, y);
    const auto dd = dd_baseline(m, y, 4);
    REQUIRE(comp == testing::comp_oracle(m, y));
    REQUIRE(dd == testing::dd_oracle(m, y));
    REQUIRE(subset(x.labels, comp));
    REQUIRE(subset(dd, x.labels));
  }
}

TEST_CASE("leaf-trim false retention matches the row-collision rate",
          "[decode][.slow][statistical]") {
  // An innocent survivor stays declared iff all log2k of its row tests are
  // positive.  Each row is positive for it with probability
  // p2 = 1 - (1 - 1/buckets)^k, so the per-survivor retention rate should
  // sit near p2^log2k, which the analysis rounds up to 1/16^log2k = k^-4.
  ExperimentConfig cfg;
  cfg.scheme = Scheme::pcns16;
  cfg.n = 1 << 12;
  cfg.k = 16;
  cfg.epsilon = 0.05;
  cfg.trials = 150000;
  cfg.seed = 131;
  cfg.threads = 0;
  const ExperimentResult r = run_experiment(cfg);
  double survivors = 0.0, retained = 0.0;
  for (const TrialRecord& rec : r.records) {
    survivors += static_cast<double>(rec.excess);
    retained += static_cast<double>(rec.false_positives);
  }
  REQUIRE(survivors > 0.0);
  const double p2 =
      1.0 - std::pow(1.0 - 1.0 / static_cast<double>(r.params.buckets),
                     static_cast<double>(cfg.k));
  const double predicted = std::pow(p2, static_cast<double>(r.params.log2k));
  const double k4 = std::pow(static_cast<double>(cfg.k), -4.0);
  REQUIRE(predicted <= k4);
  const double rate = retained / survivors;
  const double sigma = std::sqrt(predicted * (1.0 - predicted) / survivors);
  INFO("rate = " << rate << " predicted = " << predicted
                 << " survivors = " << survivors);
  REQUIRE(std::abs(rate - predicted) <= 3.0 * sigma);
  REQUIRE(rate <= k4 + 3.0 * sigma);
}

TEST_CASE("decode exposes the final watch list for the harness", "[decode]") {
  const SchemeParams p = validate_params(1 << 12, 16, 0.05, Scheme::pcns16, 107);
  const InfectionVector x = sample_infection(p, derive_trial_seed(107, 4));
  const OutcomeTable table = simulate_outcomes(p, x);
  const DecodeReport r = decode(p, table);
  REQUIRE(r.final_list_excess ==
          static_cast<std::int64_t>(r.final_watchlist.size()) -
              static_cast<std::int64_t>(p.k));
  REQUIRE(r.level_excess.size() == p.phase1_level_count());
  const auto labels = watchlist_labels(r.final_watchlist);
  REQUIRE(subset(x.labels, labels));
}
