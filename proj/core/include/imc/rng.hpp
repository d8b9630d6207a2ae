#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace imc {

// One independent engine per (seed, stream). Replicated computations draw
// from their own stream so results do not depend on scheduling order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Uniform double in [0,1) from the raw 64-bit output. Bypasses
// std::uniform_real_distribution, whose sequence is implementation-defined.
inline double next_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Sample an index from a row of nonnegative weights summing to ~1.
// Rounding shortfall goes to the last positive entry.
inline std::size_t sample_index(std::mt19937_64& g, std::span<const double> weights) {
  const double u = next_double(g);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) last_positive = j;
    acc += weights[j];
    if (u < acc) return j;
  }
  return last_positive;
}

}  // namespace imc
