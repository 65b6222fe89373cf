#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "pcns/core.hpp"
#include "pcns/design.hpp"
#include "pcns/error.hpp"

namespace pcns {

// Test outcomes stored as positive-index sets, one per block row, so a
// decoder query is an O(1) expected membership lookup.  Building the table
// touches only the infected labels: O(k log n) hash evaluations, never n.
// Immutable once built; concurrent readers are fine.
struct OutcomeTable {
  SchemeParams params;
  std::vector<std::unordered_set<std::uint64_t>> phase1;  // [level - phase1_first]
  std::vector<std::unordered_set<std::uint64_t>> phase2;  // [row - 1], comp variants
  std::unordered_set<std::uint64_t> dd;                   // pcns-dd block
};

inline OutcomeTable simulate_outcomes(const SchemeParams& p,
                                      const InfectionVector& x) {
  OutcomeTable t;
  t.params = p;
  t.phase1.resize(p.phase1_level_count());
  for (unsigned lvl = p.phase1_first; lvl <= p.phase1_last; ++lvl) {
    auto& positives = t.phase1[lvl - p.phase1_first];
    for (std::uint64_t label : x.labels)
      positives.insert(
          phase1_test(p, Prefix::of_label(label, p.log2n, lvl)).bucket);
  }
  if (p.is_comp_variant()) {
    t.phase2.resize(p.log2k);
    for (unsigned row = 1; row <= p.log2k; ++row) {
      auto& positives = t.phase2[row - 1];
      for (std::uint64_t label : x.labels)
        positives.insert(phase2_test_comp(p, label, row).bucket);
    }
  } else {
    for (std::uint64_t label : x.labels)
      for (TestId id : dd_tests_for(p, label)) t.dd.insert(id.bucket);
  }
  return t;
}

inline bool query(const OutcomeTable& t, TestId id) {
  const SchemeParams& p = t.params;
  if (id.level >= p.phase1_first && id.level <= p.phase1_last) {
    if (id.bucket >= p.buckets) fail(Errc::unknown_test, "bucket too large");
    return t.phase1[id.level - p.phase1_first].contains(id.bucket);
  }
  if (id.level == 0 && p.scheme == Scheme::pcns_dd) {
    if (id.bucket >= p.dd_tests) fail(Errc::unknown_test, "DD index too large");
    return t.dd.contains(id.bucket);
  }
  if (id.level >= 1 && id.level <= p.log2k && p.is_comp_variant()) {
    if (id.bucket >= p.buckets) fail(Errc::unknown_test, "bucket too large");
    return t.phase2[id.level - 1].contains(id.bucket);
  }
  fail(Errc::unknown_test, "level outside every block");
}

}  // namespace pcns
