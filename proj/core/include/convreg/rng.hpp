#pragma once

#include <cstdint>
#include <vector>

#include "convreg/tensor.hpp"

namespace convreg {

/// Deterministic standard-normal stream.
///
/// State advance and output mixing are SplitMix64:
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z = z ^ (z >> 31)
/// A uniform in (0, 1) is ((z >> 11) + 0.5) * 2^-53. Normals come in pairs
/// from the Box-Muller transform of two consecutive uniforms u1, u2:
///   sqrt(-2 ln u1) * cos(2 pi u2), then sqrt(-2 ln u1) * sin(2 pi u2).
class SeededGaussian {
 public:
  explicit SeededGaussian(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_uniform();
  double next_normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// k x k x g x h kernel of independent standard normals. Entries are drawn
/// with p varying fastest, then q, z, y (column-major, as randn(k,k,g,h)).
Kernel random_kernel(int k, int g, int h, std::uint64_t seed);

/// N x N x c feature map of standard normals, drawn in storage order.
FeatureMap random_feature_map(int n, int channels, std::uint64_t seed);

std::vector<double> random_vector(std::size_t length, std::uint64_t seed);

}  // namespace convreg
