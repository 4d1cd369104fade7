#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace meshroute {

/// Seeded generator used for every random draw in the project.
///
/// Algorithm (version 1): the 64-bit Mersenne Twister std::mt19937_64, whose
/// output sequence is fixed by the C++ standard. Distributions are NOT taken
/// from <random> (their algorithms are implementation-defined); instead:
///   uniform01      = (u64 >> 11) * 2^-53                     in [0, 1)
///   uniform_int    = lo + rejection-sampled u64 mod span     in [lo, hi]
///   shuffle        = Fisher-Yates from the back, j = uniform_int(0, i)
/// Sub-streams are derived with SplitMix64 (see derive_seed).
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1U;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full range
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return lo + static_cast<std::int64_t>(draw % span);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser over (master, stream); used to give every tree,
/// scenario and workload its own independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace meshroute
