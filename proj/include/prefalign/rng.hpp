#pragma once

#include <cmath>
#include <random>
#include <vector>

namespace prefalign {

/// Uniform in (0, 1]; never 0, so log() below is safe.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Box-Muller from explicit uniforms. std::normal_distribution's draw
/// sequence is implementation-defined; this one is pinned by mt19937_64.
inline double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::vector<double> gaussian_vec(std::mt19937_64& rng, std::size_t d) {
  std::vector<double> v(d);
  for (auto& x : v) x = gaussian(rng);
  return v;
}

}  // namespace prefalign
