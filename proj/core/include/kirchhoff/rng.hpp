#pragma once

#include <cstdint>

namespace kirchhoff {

// SplitMix64 (Steele-Lea-Flood). This is the committed generator for random
// initial data: the output stream for a given seed is part of the regression
// contract (golden CSVs, frozen s(0) constants), so it must never be swapped
// for an unspecified engine like std::mt19937.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double symmetric() { return 2.0 * uniform01() - 1.0; }
};

}  // namespace kirchhoff
