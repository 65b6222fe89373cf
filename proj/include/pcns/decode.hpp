#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "pcns/core.hpp"
#include "pcns/design.hpp"
#include "pcns/error.hpp"
#include "pcns/outcomes.hpp"

namespace pcns {

enum class TrialStatus { exact, wa_false_positive, wa_false_negative, tle };

inline constexpr std::string_view to_string(TrialStatus s) noexcept {
  switch (s) {
    case TrialStatus::exact: return "EXACT";
    case TrialStatus::wa_false_positive: return "WA_FALSE_POSITIVE";
    case TrialStatus::wa_false_negative: return "WA_FALSE_NEGATIVE";
    case TrialStatus::tle: return "TLE";
  }
  return "?";
}

// Operation counts of a single decode.  One unit of prefix_handled per
// prefix placed on the grown list, one hash per hash evaluation; queries are
// tallied separately for profiling.
struct OpCounters {
  std::uint64_t hashes = 0;
  std::uint64_t prefix_handled = 0;
  std::uint64_t queries = 0;
  std::uint64_t dd_edges = 0;
};

// The two watch lists of suspicious prefixes.  All current entries share one
// length; grown holds their children before pruning.
struct WatchLists {
  std::vector<Prefix> current;
  std::vector<Prefix> grown;
  unsigned level = 0;
};

struct Phase1Result {
  std::vector<Prefix> survivors;  // final W_p, pruned at stop_level
  bool tle = false;
  // Excess |W_g| - k per tree level, recorded as each grown list is formed.
  std::vector<std::int64_t> grown_excess;
};

// Grow-and-prune over the tree levels.  Starts from all k prefixes of length
// log2k, doubles them, keeps a child iff its tree test is positive, stops
// after pruning at stop_level.  Infected prefixes always survive because
// their own tests are positive, so the result never misses a defective.
// Exceeding either budget aborts with the TLE flag set - a classified
// outcome, not an error.
inline Phase1Result grow_and_prune(const SchemeParams& p,
                                   const OutcomeTable& table,
                                   unsigned stop_level, OpCounters& ops) {
  if (stop_level < p.phase1_first || stop_level > p.phase1_last)
    fail(Errc::level_out_of_range, "stop level outside tree levels");

  Phase1Result out;
  WatchLists w;
  w.level = p.log2k;
  w.current.reserve(2 * p.k);
  for (std::uint64_t v = 0; v < p.k; ++v)
    w.current.push_back({p.log2k, v});

  for (unsigned lvl = p.phase1_first; lvl <= stop_level; ++lvl) {
    w.grown.clear();
    w.grown.reserve(2 * w.current.size());
    for (Prefix q : w.current) {
      w.grown.push_back(q.child(0));
      w.grown.push_back(q.child(1));
    }
    ops.prefix_handled += w.grown.size();
    out.grown_excess.push_back(static_cast<std::int64_t>(w.grown.size()) -
                               static_cast<std::int64_t>(p.k));
    if (ops.prefix_handled > p.prefix_budget) {
      out.tle = true;
      return out;
    }
    w.current.clear();
    for (Prefix q : w.grown) {
      ++ops.hashes;
      if (ops.hashes > p.hash_budget) {
        out.tle = true;
        return out;
      }
      ++ops.queries;
      if (query(table, phase1_test(p, q))) w.current.push_back(q);
    }
    w.level = lvl;
  }
  out.survivors = std::move(w.current);
  return out;
}

// Keep a full-length survivor iff all of its log2k per-label row tests are
// positive.  Infected labels always pass.
inline std::vector<std::uint64_t> leaf_trim(const SchemeParams& p,
                                            const OutcomeTable& table,
                                            const std::vector<Prefix>& wp,
                                            OpCounters& ops) {
  if (!p.is_comp_variant())
    fail(Errc::wrong_scheme, "leaf trimming applies to comp variants");
  std::vector<std::uint64_t> declared;
  declared.reserve(wp.size());
  for (Prefix s : wp) {
    if (s.length != p.log2n)
      fail(Errc::level_out_of_range, "watch list entry is not a full label");
    bool keep = true;
    for (unsigned row = 1; row <= p.log2k; ++row) {
      ++ops.hashes;
      ++ops.queries;
      if (!query(table, phase2_test_comp(p, s.value, row))) {
        keep = false;
        break;
      }
    }
    if (keep) declared.push_back(s.value);
  }
  std::sort(declared.begin(), declared.end());
  return declared;
}

// The DD finisher of pcns-dd.  Candidates are every label included by a
// surviving prefix (k labels each).  Step One builds the bipartite
// candidate/test graph, Step Two drops candidates incident to a negative
// test, Step Three scans tests in index order and declares the sole
// remaining neighbor of each positive test of degree one.  Since the grown
// watch list never loses an infected prefix, every infected label is a
// candidate and survives Step Two, so a degree-one positive test can only
// point at a defective: no false positives.
inline std::vector<std::uint64_t> dd_finish(const SchemeParams& p,
                                            const OutcomeTable& table,
                                            const std::vector<Prefix>& wp,
                                            OpCounters& ops) {
  if (p.scheme != Scheme::pcns_dd)
    fail(Errc::wrong_scheme, "DD finisher applies to pcns-dd");

  std::vector<std::uint64_t> candidates;
  candidates.reserve(wp.size() * p.k);
  for (Prefix q : wp) {
    if (q.length != p.phase1_last)
      fail(Errc::level_out_of_range, "watch list entry has the wrong length");
    const std::uint64_t first = q.first_label(p.log2n);
    for (std::uint64_t off = 0; off < q.label_count(p.log2n); ++off)
      candidates.push_back(first + off);
  }

  // Step One: per-candidate sorted distinct test lists plus the reverse
  // incidence, so Step Three can look up neighbors without re-hashing.
  std::vector<std::vector<std::uint32_t>> tests_of(candidates.size());
  std::vector<std::vector<std::uint32_t>> members(p.dd_tests);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto ids = dd_tests_for(p, candidates[i]);
    ops.hashes += ids.size();
    auto& mine = tests_of[i];
    mine.reserve(ids.size());
    for (TestId id : ids) mine.push_back(static_cast<std::uint32_t>(id.bucket));
    std::sort(mine.begin(), mine.end());
    mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
    ops.dd_edges += mine.size();
    for (std::uint32_t t : mine) members[t].push_back(static_cast<std::uint32_t>(i));
  }

  // Step Two.
  std::vector<std::uint8_t> alive(candidates.size(), 1);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::uint32_t t : tests_of[i]) {
      ++ops.queries;
      if (!table.dd.contains(t)) {
        alive[i] = 0;
        break;
      }
    }
  }

  // Step Three.
  std::vector<std::uint64_t> declared;
  for (std::uint64_t t = 0; t < p.dd_tests; ++t) {
    if (members[t].empty()) continue;
    ++ops.queries;
    if (!table.dd.contains(t)) continue;
    std::uint32_t last = 0;
    unsigned degree = 0;
    for (std::uint32_t i : members[t]) {
      if (alive[i]) {
        last = i;
        if (++degree > 1) break;
      }
    }
    if (degree == 1) declared.push_back(candidates[last]);
  }
  std::sort(declared.begin(), declared.end());
  declared.erase(std::unique(declared.begin(), declared.end()), declared.end());
  return declared;
}

// One decoded trial.  status is finalized by classify(); the decoder itself
// only knows whether it timed out.
struct DecodeReport {
  std::vector<std::uint64_t> declared;
  TrialStatus status = TrialStatus::exact;
  bool tle = false;
  OpCounters counters;
  std::int64_t final_list_excess = 0;        // |final W_p| - k
  std::vector<std::int64_t> level_excess;    // |W_g| - k per tree level
  std::vector<Prefix> final_watchlist;       // final W_p
  std::uint64_t false_positives = 0;         // set by classify()
  std::uint64_t false_negatives = 0;
};

inline DecodeReport decode(const SchemeParams& p, const OutcomeTable& table) {
  DecodeReport r;
  const unsigned stop = p.phase1_last;
  Phase1Result ph1 = grow_and_prune(p, table, stop, r.counters);
  r.level_excess = std::move(ph1.grown_excess);
  if (ph1.tle) {
    r.tle = true;
    r.status = TrialStatus::tle;
    return r;
  }
  r.final_watchlist = std::move(ph1.survivors);
  r.final_list_excess = static_cast<std::int64_t>(r.final_watchlist.size()) -
                        static_cast<std::int64_t>(p.k);
  r.declared = p.is_comp_variant()
                   ? leaf_trim(p, table, r.final_watchlist, r.counters)
                   : dd_finish(p, table, r.final_watchlist, r.counters);
  // The op timer covers the finishing phase as well.
  if (r.counters.hashes > p.hash_budget ||
      r.counters.prefix_handled > p.prefix_budget) {
    r.tle = true;
    r.status = TrialStatus::tle;
    r.declared.clear();
  }
  return r;
}

// Error classification belongs to the harness; the decoder never sees x.
inline void classify(DecodeReport& r, const InfectionVector& truth) {
  std::uint64_t fp = 0;
  for (std::uint64_t d : r.declared)
    if (!truth.contains(d)) ++fp;
  r.false_positives = fp;
  r.false_negatives =
      truth.size() - (r.declared.size() - fp);  // truths not declared
  if (r.tle) {
    r.status = TrialStatus::tle;
  } else if (r.false_negatives > 0) {
    r.status = TrialStatus::wa_false_negative;
  } else if (r.false_positives > 0) {
    r.status = TrialStatus::wa_false_positive;
  } else {
    r.status = TrialStatus::exact;
  }
}

// ---------------------------------------------------------------------------
// Classical decoders on an explicit matrix; the slow reference points.
// ---------------------------------------------------------------------------

// COMP: an item is declared defective iff it appears in no negative test.
// Always a superset of the truth.
inline std::vector<std::uint64_t> comp_baseline(
    const SparseMatrix& m, std::span<const std::uint8_t> y) {
  if (y.size() != m.rows)
    fail(Errc::dimension_mismatch, "outcome vector length != rows");
  std::vector<std::uint8_t> possible(m.cols, 1);
  for (std::uint64_t r = 0; r < m.rows; ++r)
    if (!y[r])
      for (std::uint32_t j : m.row_cols[r]) possible[j] = 0;
  std::vector<std::uint64_t> declared;
  for (std::uint64_t j = 0; j < m.cols; ++j)
    if (possible[j]) declared.push_back(j);
  return declared;
}

// DD: remove items in negative tests, then declare the sole remaining member
// of every positive test.  Always a subset of the truth.  k is accepted for
// signature parity with the scheme decoders; classical DD has no use for it
// beyond reserving space.
inline std::vector<std::uint64_t> dd_baseline(const SparseMatrix& m,
                                              std::span<const std::uint8_t> y,
                                              std::uint64_t k) {
  if (y.size() != m.rows)
    fail(Errc::dimension_mismatch, "outcome vector length != rows");
  std::vector<std::uint8_t> possible(m.cols, 1);
  for (std::uint64_t r = 0; r < m.rows; ++r)
    if (!y[r])
      for (std::uint32_t j : m.row_cols[r]) possible[j] = 0;
  std::vector<std::uint64_t> declared;
  declared.reserve(k);
  for (std::uint64_t r = 0; r < m.rows; ++r) {
    if (!y[r]) continue;
    std::uint32_t last = 0;
    unsigned degree = 0;
    for (std::uint32_t j : m.row_cols[r]) {
      if (possible[j]) {
        last = j;
        if (++degree > 1) break;
      }
    }
    if (degree == 1) declared.push_back(last);
  }
  std::sort(declared.begin(), declared.end());
  declared.erase(std::unique(declared.begin(), declared.end()), declared.end());
  return declared;
}

}  // namespace pcns
