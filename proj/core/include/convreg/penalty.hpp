#pragma once

#include <Eigen/Dense>

#include "convreg/sparse.hpp"
#include "convreg/tensor.hpp"
#include "convreg/transform_matrix.hpp"

namespace convreg {

struct RegularizerConfig {
  double alpha = 1.0;  ///< target scale of M^T M
  int n = 1;           ///< input spatial size N

  void validate() const;
};

/// dR/dK for R(K) = ||M^T M - alpha I||_F^2, shaped like the kernel.
struct PenaltyGradient {
  Kernel values;
  double alpha = 1.0;
  double penalty = 0.0;

  double frobenius_norm() const;
};

/// R(K) = ||M^T M - alpha I||_F^2 with M = build_transform(K, cfg.n).
double penalty(const Kernel& kernel, const RegularizerConfig& cfg);

/// Literal evaluation over dense M and E = M^T M - alpha I:
///   dR/dK(p,q,z,y) = 2 sum_{(i,j) in Omega} ( sum_t E(j,t) M(i,t) + sum_s E(s,j) M(i,s) ).
/// Cost is O(nnz(M) * g N^2); intended for verification at small sizes.
PenaltyGradient gradient_direct(const Kernel& kernel, const RegularizerConfig& cfg);

/// Sparse evaluation dR/dK(p,q,z,y) = 4 sum_{(i,j) in Omega} (M E)(i,j), using E = E^T.
PenaltyGradient gradient_fast(const Kernel& kernel, const RegularizerConfig& cfg);

/// Central differences (R(K + step e) - R(K - step e)) / (2 step) per entry.
PenaltyGradient gradient_fd(const Kernel& kernel, const RegularizerConfig& cfg, double step = 1e-6);

/// Reusable penalty/gradient evaluator for one geometry. Keeps the transform
/// matrix structure between calls and only rewrites its values.
class PenaltyEvaluator {
 public:
  PenaltyEvaluator(const Kernel& kernel, const RegularizerConfig& cfg);

  /// Refreshes M from `kernel`, then computes R and dR/dK sharing one E.
  PenaltyGradient evaluate(const Kernel& kernel);
  /// Penalty only.
  double penalty(const Kernel& kernel);

  /// Matrix from the most recent evaluate()/penalty() call.
  const TransformMatrix& matrix() const { return matrix_; }
  const RegularizerConfig& config() const { return cfg_; }

 private:
  RegularizerConfig cfg_;
  TransformMatrix matrix_;
  std::vector<double> accum_;
};

/// max_i |a_i - b_i| / max(floor, max_i |a_i|, max_i |b_i|); 0 when a == b.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 0.0);

/// d||A||_F^2 / dA, entrywise 2 a_ij.
Eigen::MatrixXd frobenius_sq_derivative(const Eigen::MatrixXd& a);

/// d(A^T A) / d a_ij = A^T e_i e_j^T + e_j e_i^T A.
Eigen::MatrixXd gram_entry_derivative(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j);

}  // namespace convreg
