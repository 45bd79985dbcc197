#pragma once

#include <cstdint>
#include <random>

namespace esm {

// 53-bit uniform double in [0, 1). std::generate_canonical and the
// distribution classes are implementation-defined across standard libraries;
// this fixed mapping keeps every seeded draw bit-reproducible.
inline double canonical(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * canonical(gen);
}

// Derives a per-point seed from an experiment seed and a point index so that
// experiment points are independently reproducible. Wraps modulo 2^64.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t point) {
  return seed * 1000003ull + point;
}

}  // namespace esm
