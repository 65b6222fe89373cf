#pragma once

#include <bit>
#include <cstdint>

namespace pcns {

// Keyed 64-bit mixing function used wherever a scheme needs a hash value.
// Stateless and reproducible: the (seed, level, value) triple fully
// determines the output, so nothing about an assignment has to be stored.
//
// Reference definition, all arithmetic mod 2^64:
//   w = seed ^ rotl(level * 0x9E3779B97F4A7C15, 17) ^ value * 0xD1B54A32D192ED03
//   z = w + 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   out = z ^ (z >> 31)
inline constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t level,
                                      std::uint64_t value) noexcept {
  constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  const std::uint64_t w =
      seed ^ std::rotl(level * golden, 17) ^ (value * 0xD1B54A32D192ED03ULL);
  std::uint64_t z = w + golden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// The three hash families (tree levels, per-label rows, DD rows) share one
// 64-bit level domain.  Tree levels use the prefix length itself; the other
// families are shifted past log2(n) so they can never collide.  Level 63 is
// reserved for deriving per-trial seeds.
inline constexpr std::uint64_t kTrialSeedLevel = 63;

inline constexpr std::uint64_t phase2_hash_level(unsigned log2n,
                                                 unsigned row) noexcept {
  return static_cast<std::uint64_t>(log2n) + row;
}

inline constexpr std::uint64_t dd_hash_level(unsigned log2n,
                                             unsigned row) noexcept {
  return 2ULL * log2n + row;
}

inline constexpr std::uint64_t derive_trial_seed(std::uint64_t seed,
                                                 std::uint64_t trial) noexcept {
  return hash64(seed, kTrialSeedLevel, trial);
}

// Minimal splittable counter generator for Monte Carlo draws.  Used instead
// of <random> engines + distributions because those are not guaranteed to
// produce the same stream on every standard library.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by masked rejection; unbiased for every bound.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t mask = std::bit_ceil(bound) - 1;
    for (;;) {
      const std::uint64_t r = next() & mask;
      if (r < bound) return r;
    }
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace pcns
