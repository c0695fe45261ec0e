#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace relest {

struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 step. Used to expand seeds and to derive substreams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
///
/// A generator is identified by (seed, stream). The 256-bit state is filled by
/// SplitMix64 from a mix of both, so stream k of a seed never depends on how
/// many draws other streams consumed. Parallel callers take one stream per
/// work item (replication, draw) and get schedule-independent results.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngSeed seed, std::uint64_t stream = 0) noexcept {
    std::uint64_t sm = seed.value;
    std::uint64_t mix = splitmix64(sm);
    mix ^= stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL;
    for (auto& word : state_) word = splitmix64(mix);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Stream index for a (group, item) pair, e.g. (dimension slot, replication).
constexpr std::uint64_t stream_index(std::uint64_t group, std::uint64_t item) noexcept {
  return (group << 40) ^ item;
}

}  // namespace relest
