#pragma once

#include <cstdint>

namespace fxctl {

// Counter-based generator: draw k of stream `seed` is
// splitmix64_mix(seed + (k + 1) * 0x9E3779B97F4A7C15). The whole state is
// (seed, counter), so any implementation of the mix reproduces a run.
struct CounterRng {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter;
    return mix(seed + counter * kGamma);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool operator==(const CounterRng&) const = default;
};

}  // namespace fxctl
