#include "convreg/rng.hpp"

#include <cmath>
#include <numbers>

namespace convreg {

std::uint64_t SeededGaussian::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededGaussian::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededGaussian::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Kernel random_kernel(int k, int g, int h, std::uint64_t seed) {
  Kernel kernel(k, g, h);
  SeededGaussian rng(seed);
  for (int y = 0; y < h; ++y)
    for (int z = 0; z < g; ++z)
      for (int q = 0; q < k; ++q)
        for (int p = 0; p < k; ++p) kernel(p, q, z, y) = rng.next_normal();
  return kernel;
}

FeatureMap random_feature_map(int n, int channels, std::uint64_t seed) {
  FeatureMap x(n, channels);
  SeededGaussian rng(seed);
  for (double& v : x.values()) v = rng.next_normal();
  return x;
}

std::vector<double> random_vector(std::size_t length, std::uint64_t seed) {
  std::vector<double> out(length);
  SeededGaussian rng(seed);
  for (double& v : out) v = rng.next_normal();
  return out;
}

}  // namespace convreg
