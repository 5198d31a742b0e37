// Seedable, platform-independent random number generation.  The generator is
// splitmix64 (Steele, Lea, Flood 2014); doubles come from the top 53 bits, so
// the same seed reproduces the same stream on every platform.
#pragma once

#include <cstdint>

namespace activeset {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw on [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform draw on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform draw on [-eps, eps).
  double symmetric(double eps) { return uniform(-eps, eps); }
};

/// Derives an independent stream seed from a master seed and stream indices
/// (grid cell, trial, noise level, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  SplitMix64 g(master);
  std::uint64_t s = g.next_u64();
  s ^= SplitMix64(a ^ 0x2545f4914f6cdd1dULL).next_u64();
  s = SplitMix64(s).next_u64();
  s ^= SplitMix64(b ^ 0x9e3779b97f4a7c15ULL).next_u64();
  s = SplitMix64(s).next_u64();
  s ^= SplitMix64(c ^ 0xd6e8feb86659fd93ULL).next_u64();
  return SplitMix64(s).next_u64();
}

}  // namespace activeset
