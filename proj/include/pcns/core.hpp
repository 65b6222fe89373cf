#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pcns/error.hpp"
#include "pcns/hash.hpp"

namespace pcns {

enum class Scheme { pcns16, pcns_comp, pcns_dd };

inline constexpr std::string_view to_string(Scheme s) noexcept {

  switch (s) {
    case Scheme::pcns16: return "pcns16";
    case Scheme::pcns_comp: return "pcns-comp";
    case Scheme::pcns_dd: return "pcns-dd";
  }
  return "?";
}

inline std::optional<Scheme> scheme_from_string(std::string_view s) noexcept {
  if (s == "pcns16") return Scheme::pcns16;
  if (s == "pcns-comp") return Scheme::pcns_comp;
  if (s == "pcns-dd") return Scheme::pcns_dd;
  return std::nullopt;
}

// Validated scheme parameters plus every derived constant the encoder and
// decoder need.  Construct through validate_params(); immutable afterwards.
struct SchemeParams {
  std::uint64_t n = 0;  // population size, power of two
  std::uint64_t k = 0;  // defective count, power of two, 2 <= k <= n/4
  double epsilon = 0.0; // in (0, 1/8)
  Scheme scheme = Scheme::pcns16;
  std::uint64_t seed = 0;

  unsigned log2n = 0;
  unsigned log2k = 0;
  double c = 0.0;             // 1 / ln(2 - 4*epsilon)
  std::uint64_t buckets = 0;  // tests per tree level: 16k, or ceil(c*k)
  unsigned phase1_first = 0;  // first tree level, log2k + 1
  unsigned phase1_last = 0;   // log2n, or log2(n/k) for pcns-dd
  std::uint64_t dd_tests = 0;       // T = ceil(c*k*log2(2k/eps)), pcns-dd only
  unsigned dd_column_weight = 0;    // L = ceil(c*ln(2k/eps)),     pcns-dd only
  std::uint64_t prefix_budget = 0;  // max prefixes a decode may handle
  std::uint64_t hash_budget = 0;    // max hash evaluations per decode

  unsigned phase1_level_count() const noexcept {
    return phase1_last - phase1_first + 1;
  }
  bool is_comp_variant() const noexcept { return scheme != Scheme::pcns_dd; }
  // Sparsity parameter log_n(k).
  double theta() const noexcept {
    return static_cast<double>(log2k) / static_cast<double>(log2n);
  }
};

// Largest supported population.  Keeps every hash-level domain clear of the
// reserved trial-seed level.
inline constexpr unsigned kMaxLog2n = 24;

inline SchemeParams validate_params(std::uint64_t n, std::uint64_t k,
                                    double epsilon, Scheme scheme,
                                    std::uint64_t seed) {
  if (n < 2 || !std::has_single_bit(n))
    fail(Errc::not_power_of_two, "n must be a power of two >= 2");
  if (k < 1 || !std::has_single_bit(k))
    fail(Errc::not_power_of_two, "k must be a power of two >= 2");
  if (k < 2 || k > n / 4)
    fail(Errc::k_too_large, "k must satisfy 2 <= k <= n/4");
  if (!(epsilon > 0.0) || !(epsilon < 0.125))
    fail(Errc::epsilon_out_of_range, "epsilon must lie in (0, 1/8)");

  SchemeParams p;
  p.n = n;
  p.k = k;
  p.epsilon = epsilon;
  p.scheme = scheme;
  p.seed = seed;
  p.log2n = static_cast<unsigned>(std::countr_zero(n));
  p.log2k = static_cast<unsigned>(std::countr_zero(k));
  if (p.log2n > kMaxLog2n) fail(Errc::too_large, "n exceeds 2^24");

  p.c = 1.0 / std::log(2.0 - 4.0 * epsilon);
  p.buckets = (scheme == Scheme::pcns16)
                  ? 16 * k
                  : static_cast<std::uint64_t>(
                        std::ceil(p.c * static_cast<double>(k)));
  p.phase1_first = p.log2k + 1;

  if (scheme == Scheme::pcns_dd) {
    // Theorem hypothesis theta < 1/2, i.e. k^2 < n; also guarantees the
    // level range log2k+1 .. log2(n/k) is nonempty.
    if (k * k >= n)
      fail(Errc::theta_too_large, "pcns-dd requires k^2 < n (theta < 1/2)");
    p.phase1_last = p.log2n - p.log2k;
    const double two_k_over_eps = 2.0 * static_cast<double>(k) / epsilon;
    p.dd_column_weight = static_cast<unsigned>(
        std::ceil(p.c * std::log(two_k_over_eps)));
    p.dd_tests = static_cast<std::uint64_t>(
        std::ceil(p.c * static_cast<double>(k) * std::log2(two_k_over_eps)));
    if (dd_hash_level(p.log2n, p.dd_column_weight) >= kTrialSeedLevel)
      fail(Errc::too_large, "DD hash levels would reach the reserved domain");
  } else {
    p.phase1_last = p.log2n;
  }

  const double klog2n = static_cast<double>(k) * p.log2n;
  p.hash_budget = static_cast<std::uint64_t>(
      std::ceil(klog2n / (epsilon * epsilon)));
  // The 3*k*log2(n) handled-prefix bound is specific to the 16k-bucket
  // scheme; the ck-bucket variants keep ~k/(2*eps) extra prefixes per level
  // and are budgeted by their own hashing bound instead.
  p.prefix_budget = (scheme == Scheme::pcns16)
                        ? 3 * k * static_cast<std::uint64_t>(p.log2n)
                        : p.hash_budget;

  return p;
}

// A length-l prefix of a label, most-significant-bit first.  Identifies the
// subtree of all labels that begin with these bits.
struct Prefix {
  unsigned length = 0;
  std::uint64_t value = 0;

  constexpr Prefix child(unsigned bit) const noexcept {
    return {length + 1, (value << 1) | (bit & 1u)};
  }
  constexpr Prefix parent() const noexcept {
    return {length - 1, value >> 1};
  }
  static constexpr Prefix of_label(std::uint64_t label, unsigned log2n,
                                   unsigned length) noexcept {
    return {length, label >> (log2n - length)};
  }
  // Labels covered: [first_label, first_label + label_count).
  constexpr std::uint64_t first_label(unsigned log2n) const noexcept {
    return value << (log2n - length);
  }
  constexpr std::uint64_t label_count(unsigned log2n) const noexcept {
    return std::uint64_t{1} << (log2n - length);
  }

  friend constexpr bool operator==(Prefix, Prefix) noexcept = default;
};

// The hidden set of infected labels; at most k of them, sorted.
struct InfectionVector {
  std::vector<std::uint64_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool contains(std::uint64_t label) const noexcept {
    return std::binary_search(labels.begin(), labels.end(), label);
  }

  static InfectionVector from_labels(std::vector<std::uint64_t> labels,
                                     const SchemeParams& p) {
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
      fail(Errc::domain_error, "labels must be distinct");
    if (labels.size() > p.k)
      fail(Errc::k_too_large, "more than k infected labels");
    if (!labels.empty() && labels.back() >= p.n)
      fail(Errc::domain_error, "label out of range");
    return InfectionVector{std::move(labels)};
  }
};

// Uniform k-subset of {0..n-1} by Floyd's algorithm; O(k) draws.
// Reproducible given the trial seed (see derive_trial_seed).
inline InfectionVector sample_infection(const SchemeParams& p,
                                        std::uint64_t trial_seed) {
  SplitMix64 rng(trial_seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(2 * p.k);
  for (std::uint64_t j = p.n - p.k; j < p.n; ++j) {
    const std::uint64_t t = rng.next_below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  InfectionVector x;
  x.labels.assign(chosen.begin(), chosen.end());
  std::sort(x.labels.begin(), x.labels.end());
  return x;
}

// Address of one test.  Level 0 is the flat DD block (pcns-dd); levels
// 1..log2k are the per-label rows of the comp variants; levels
// phase1_first..phase1_last are the tree levels.
struct TestId {
  unsigned level = 0;
  std::uint64_t bucket = 0;

  friend constexpr bool operator==(TestId, TestId) noexcept = default;
};

}  // namespace pcns
