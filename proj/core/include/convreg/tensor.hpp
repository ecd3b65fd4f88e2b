#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace convreg {

/// Raised when tensor shapes or channel counts do not line up.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Convolution kernel K of shape k x k x g x h (g input channels, h output
/// channels). Indices are 0-based in the API; element (p, q, z, y) is stored
/// at ((p * k + q) * g + z) * h + y, which is also the JSON serialization
/// order (y fastest, p slowest).
class Kernel {
 public:
  Kernel() = default;
  Kernel(int k, int g, int h);
  Kernel(int k, int g, int h, std::vector<double> values);

  /// 1 at the spatial center (m, m) of every (z, z) channel pair, 0 elsewhere.
  static Kernel delta(int k, int g, int h);

  int k() const { return k_; }
  int g() const { return g_; }
  int h() const { return h_; }

  /// m = ceil(k / 2), the 1-based center index of the filter.
  int m() const { return (k_ + 1) / 2; }
  /// 0-based offset subtracted from p and q when sliding over the input.
  int center() const { return m() - 1; }

  std::size_t size() const { return values_.size(); }
  std::size_t index(int p, int q, int z, int y) const {
    return ((static_cast<std::size_t>(p) * k_ + q) * g_ + z) * h_ + y;
  }

  double operator()(int p, int q, int z, int y) const { return values_[index(p, q, z, y)]; }
  double& operator()(int p, int q, int z, int y) { return values_[index(p, q, z, y)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Kernel& other) const {
    return k_ == other.k_ && g_ == other.g_ && h_ == other.h_;
  }

  bool operator==(const Kernel&) const = default;

 private:
  int k_ = 0;
  int g_ = 0;
  int h_ = 0;
  std::vector<double> values_;
};

/// N x N x c feature map. Storage order is the vectorization order:
/// (r, s, d) lives at (d * N + r) * N + s.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int n, int channels);
  FeatureMap(int n, int channels, std::vector<double> values);

  int n() const { return n_; }
  int channels() const { return c_; }

  std::size_t index(int r, int s, int d) const {
    return (static_cast<std::size_t>(d) * n_ + r) * n_ + s;
  }

  double operator()(int r, int s, int d) const { return values_[index(r, s, d)]; }
  double& operator()(int r, int s, int d) { return values_[index(r, s, d)]; }

  /// Zero-padded read: any (r, s) outside [0, N)^2 yields 0.
  double at_padded(int r, int s, int d) const {
    if (r < 0 || s < 0 || r >= n_ || s >= n_) return 0.0;
    return values_[index(r, s, d)];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  int n_ = 0;
  int c_ = 0;
  std::vector<double> values_;
};

/// "Same" convolution (no kernel flip, zero padding, unit stride) of a
/// single-channel input with a 1 x 1-channel kernel.
FeatureMap conv_single(const Kernel& kernel, const FeatureMap& input);

/// Multi-channel same convolution:
///   Y(r, s, c) = sum_d sum_{p,q} X(r - m + p, s - m + q, d) * K(p, q, d, c).
FeatureMap conv_multi(const Kernel& kernel, const FeatureMap& input);

/// Flattens X with channel outermost, then spatial row, then spatial column.
std::vector<double> vec(const FeatureMap& x);

/// Sum of squares of the kernel entries.
double squared_norm(std::span<const double> values);

/// Kernel JSON: {"k":..,"g":..,"h":..,"data":[..]} with 17 significant digits.
std::string kernel_to_json(const Kernel& kernel);
Kernel kernel_from_json(const std::string& text);

void save_kernel(const std::string& path, const Kernel& kernel);
Kernel load_kernel(const std::string& path);

}  // namespace convreg
