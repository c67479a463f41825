#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vopi {

using Rng = std::mt19937_64;

// Derives an independent sub-stream seed from a root seed and a stream name,
// so that adding draws to one stream never shifts another.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
  return Rng(derive_seed(root, stream));
}

// Uniform real in [0, 1) built from one 64-bit draw. Independent of the
// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Standard normal draw (Box-Muller, two uniforms per call).
double standard_normal(Rng& rng);

}  // namespace vopi
