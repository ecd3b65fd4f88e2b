#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "convreg/sparse.hpp"
#include "convreg/transform_matrix.hpp"

namespace convreg {

enum class SpectrumMethod { dense, iterative };

const char* to_string(SpectrumMethod method);

/// Extreme singular values of M over its min(rows, cols) singular values
/// (zeros included).
struct SpectralEstimate {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// How sigma_min was obtained. sigma_max always comes from Lanczos.
  SpectrumMethod method = SpectrumMethod::dense;
};

/// Largest dimension for which sigma_min is computed densely.
inline constexpr std::int64_t kDenseSigmaMinLimit = 2500;

struct LanczosResult {
  double largest = 0.0;
  double smallest = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lanczos with full reorthogonalization on the smaller of A^T A and A A^T,
/// applied matrix-free. Stops once the Ritz residual of the largest Ritz
/// value drops to tol * value, the Krylov space is exhausted, or max_iter
/// steps are taken. The start vector is a fixed pseudo-random vector.
LanczosResult lanczos_gram_extrema(const CsrMatrix& a, double tol, int max_iter);

/// All singular values of A in decreasing order (dense SVD).
Eigen::VectorXd dense_singular_values(const CsrMatrix& a);

/// sigma_max and sigma_min of M. sigma_max is iterative; sigma_min is dense
/// while min(rows, cols) <= kDenseSigmaMinLimit, otherwise it is the
/// smallest Lanczos Ritz value.
SpectralEstimate singular_extrema(const TransformMatrix& m, double tol = 1e-10, int max_iter = 5000);
SpectralEstimate singular_extrema(const CsrMatrix& m, double tol = 1e-10, int max_iter = 5000);

/// max(|sigma_max - 1|, |sigma_min - 1|)
double objective_gap(const SpectralEstimate& est);

}  // namespace convreg
