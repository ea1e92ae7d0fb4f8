#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace semicop {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream `stream` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + splitmix64(stream + 0x5851F42D4C957F2DULL));
}

// Uniform on the open interval (0,1) with 53 random bits.
inline double open_uniform(Engine& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller on open_uniform, so draws do not depend on the standard library.
inline double standard_normal(Engine& g) {
  const double r = std::sqrt(-2.0 * std::log(open_uniform(g)));
  return r * std::cos(2.0 * std::numbers::pi * open_uniform(g));
}

}  // namespace semicop
