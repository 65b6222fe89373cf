#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "pcns/core.hpp"
#include "pcns/error.hpp"
#include "pcns/hash.hpp"

namespace pcns {

// ---------------------------------------------------------------------------
// Assignment maps.  These three functions ARE the measurement design; both
// the fast outcome simulation and the explicit matrix export derive from
// them, so they must stay pure in (seed, level, prefix/label).
// ---------------------------------------------------------------------------

// Tree test of a prefix: (l, hash(P) mod buckets).
inline TestId phase1_test(const SchemeParams& p, Prefix prefix) {
  if (prefix.length < p.phase1_first || prefix.length > p.phase1_last)
    fail(Errc::level_out_of_range, "prefix length outside tree levels");
  return {prefix.length, hash64(p.seed, prefix.length, prefix.value) % p.buckets};
}

// Per-label row test of the comp variants: (row, hash(row, S) mod buckets),
// 1 <= row <= log2k.  Depends on the full label, not any prefix.
inline TestId phase2_test_comp(const SchemeParams& p, std::uint64_t label,
                               unsigned row) {
  if (!p.is_comp_variant())
    fail(Errc::wrong_scheme, "per-label rows exist only for comp variants");
  if (row < 1 || row > p.log2k)
    fail(Errc::level_out_of_range, "row outside 1..log2k");
  return {row, hash64(p.seed, phase2_hash_level(p.log2n, row), label) % p.buckets};
}

// The L tests of a label in the flat DD block.  Duplicates are possible and
// kept; graph construction deduplicates them.
inline std::vector<TestId> dd_tests_for(const SchemeParams& p,
                                        std::uint64_t label) {
  if (p.scheme != Scheme::pcns_dd)
    fail(Errc::wrong_scheme, "DD block exists only for pcns-dd");
  std::vector<TestId> out;
  out.reserve(p.dd_column_weight);
  for (unsigned row = 1; row <= p.dd_column_weight; ++row)
    out.push_back(
        {0, hash64(p.seed, dd_hash_level(p.log2n, row), label) % p.dd_tests});
  return out;
}

// ---------------------------------------------------------------------------
// Layout: block sizes and the row numbering of the exported matrix.
// Tree rows come first (level-major, bucket-minor), then the per-label rows
// (comp variants) or the DD block (pcns-dd).
// ---------------------------------------------------------------------------
struct DesignLayout {
  SchemeParams params;
  std::uint64_t phase1_tests = 0;
  std::uint64_t phase2_tests = 0;  // comp variants; 0 for pcns-dd
  std::uint64_t dd_block_tests = 0;
  std::uint64_t total_tests = 0;

  static DesignLayout from(const SchemeParams& p) {
    DesignLayout d;
    d.params = p;
    d.phase1_tests = p.buckets * p.phase1_level_count();
    if (p.is_comp_variant()) {
      d.phase2_tests = p.buckets * p.log2k;
    } else {
      d.dd_block_tests = p.dd_tests;
    }
    d.total_tests = d.phase1_tests + d.phase2_tests + d.dd_block_tests;
    return d;
  }

  std::uint64_t row_of(TestId id) const {
    const SchemeParams& p = params;
    if (id.level >= p.phase1_first && id.level <= p.phase1_last) {
      if (id.bucket >= p.buckets) fail(Errc::unknown_test, "bucket too large");
      return (id.level - p.phase1_first) * p.buckets + id.bucket;
    }
    if (id.level == 0 && p.scheme == Scheme::pcns_dd) {
      if (id.bucket >= p.dd_tests) fail(Errc::unknown_test, "DD index too large");
      return phase1_tests + id.bucket;
    }
    if (id.level >= 1 && id.level <= p.log2k && p.is_comp_variant()) {
      if (id.bucket >= p.buckets) fail(Errc::unknown_test, "bucket too large");
      return phase1_tests + (id.level - 1) * p.buckets + id.bucket;
    }
    fail(Errc::unknown_test, "level outside every block");
  }

  TestId test_at(std::uint64_t row) const {
    const SchemeParams& p = params;
    if (row < phase1_tests)
      return {p.phase1_first + static_cast<unsigned>(row / p.buckets),
              row % p.buckets};
    row -= phase1_tests;
    if (p.scheme == Scheme::pcns_dd) {
      if (row >= dd_block_tests) fail(Errc::unknown_test, "row too large");
      return {0, row};
    }
    if (row >= phase2_tests) fail(Errc::unknown_test, "row too large");
    return {1 + static_cast<unsigned>(row / p.buckets), row % p.buckets};
  }
};

// Exact constructed test count next to the real-valued theorem formula.
// The construction is normative; the estimate is reported for comparison
// only and is never used to allocate anything.
struct TestCount {
  std::uint64_t constructed = 0;
  double theorem_estimate = 0.0;
};

inline TestCount test_count(const SchemeParams& p) {
  TestCount out;
  out.constructed = DesignLayout::from(p).total_tests;
  const double k = static_cast<double>(p.k);
  const double ln_n = std::log(static_cast<double>(p.n));
  switch (p.scheme) {
    case Scheme::pcns16:
      out.theorem_estimate = 16.0 * k * p.log2n;
      break;
    case Scheme::pcns_comp:
      out.theorem_estimate = p.c * p.c * k * ln_n;
      break;
    case Scheme::pcns_dd:
      out.theorem_estimate =
          p.c * p.c * k * std::log(2.0 * p.n / (p.epsilon * k));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit sparse matrix, used as the slow verification oracle.
// ---------------------------------------------------------------------------
struct SparseMatrix {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<std::vector<std::uint32_t>> row_cols;  // sorted, distinct

  // OR-product y = Gx under boolean semantics.
  std::vector<std::uint8_t> or_product(const InfectionVector& x) const {
    std::vector<std::uint8_t> member(cols, 0);
    for (std::uint64_t label : x.labels) member[label] = 1;
    std::vector<std::uint8_t> y(rows, 0);
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint32_t j : row_cols[r])
        if (member[j]) {
          y[r] = 1;
          break;
        }
    return y;
  }

  // Text format: "m n", then per row "index degree col col ...".
  void write(std::ostream& os) const {
    os << rows << ' ' << cols << '\n';
    for (std::uint64_t r = 0; r < rows; ++r) {
      os << r << ' ' << row_cols[r].size();
      for (std::uint32_t j : row_cols[r]) os << ' ' << j;
      os << '\n';
    }
  }
};

inline constexpr std::uint64_t kMaxExportCols = std::uint64_t{1} << 20;

inline SparseMatrix export_matrix(const SchemeParams& p) {
  if (p.n > kMaxExportCols)
    fail(Errc::too_large, "matrix export is limited to n <= 2^20");
  const DesignLayout layout = DesignLayout::from(p);
  SparseMatrix m;
  m.rows = layout.total_tests;
  m.cols = p.n;
  m.row_cols.resize(m.rows);
  for (std::uint64_t label = 0; label < p.n; ++label) {
    const auto j = static_cast<std::uint32_t>(label);
    for (unsigned lvl = p.phase1_first; lvl <= p.phase1_last; ++lvl)
      m.row_cols[layout.row_of(phase1_test(
                     p, Prefix::of_label(label, p.log2n, lvl)))]
          .push_back(j);
    if (p.is_comp_variant()) {
      for (unsigned row = 1; row <= p.log2k; ++row)
        m.row_cols[layout.row_of(phase2_test_comp(p, label, row))].push_back(j);
    } else {
      for (TestId id : dd_tests_for(p, label))
        m.row_cols[layout.row_of(id)].push_back(j);
    }
  }
  for (auto& cols : m.row_cols) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }
  return m;
}

}  // namespace pcns
