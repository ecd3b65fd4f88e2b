#include "convreg/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "convreg/rng.hpp"

namespace convreg {

namespace {

// Below this min-dimension sigma_min comes from an SVD of M itself; above it
// from the eigenvalues of the smaller Gram matrix, which is much cheaper.
constexpr std::int64_t kDirectSvdLimit = 500;
constexpr std::uint64_t kStartSeed = 0x5EED5EEDULL;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Applies A^T A (cols <= rows) or A A^T (otherwise).
Eigen::VectorXd apply_gram(const CsrMatrix& a, const Eigen::VectorXd& v) {
  const std::span<const double> in(v.data(), static_cast<std::size_t>(v.size()));
  if (a.cols <= a.rows) return to_eigen(multiply_transposed(a, multiply(a, in)));
  return to_eigen(multiply(a, multiply_transposed(a, in)));
}

double dense_sigma_min(const CsrMatrix& a) {
  const auto dim = std::min(a.rows, a.cols);
  if (dim <= kDirectSvdLimit) return dense_singular_values(a).minCoeff();
  const CsrMatrix small = a.cols <= a.rows ? multiply(transpose(a), a) : multiply(a, transpose(a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(small.to_dense(), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues()(0)));
}

}  // namespace

const char* to_string(SpectrumMethod method) {
  return method == SpectrumMethod::dense ? "dense" : "iterative";
}

LanczosResult lanczos_gram_extrema(const CsrMatrix& a, double tol, int max_iter) {
  const Eigen::Index dim = std::min(a.rows, a.cols);
  LanczosResult result;
  if (dim == 0) {
    result.converged = true;
    return result;
  }
  const int steps = static_cast<int>(std::min<Eigen::Index>(std::max(max_iter, 1), dim));

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(steps));
  std::vector<double> diag;
  std::vector<double> offdiag;

  Eigen::VectorXd q = to_eigen(random_vector(static_cast<std::size_t>(dim), kStartSeed));
  q.normalize();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  for (int j = 0; j < steps; ++j) {
    basis.push_back(q);
    Eigen::VectorXd w = apply_gram(a, q);
    diag.push_back(q.dot(w));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) w -= b.dot(w) * b;
    }
    const double beta = w.norm();

    const auto size = static_cast<Eigen::Index>(diag.size());
    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(diag.data(), size);
    Eigen::VectorXd e = offdiag.empty() ? Eigen::VectorXd()
                                        : Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(offdiag.data(), size - 1));
    tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);

    result.largest = tri.eigenvalues()(size - 1);
    result.smallest = tri.eigenvalues()(0);
    result.iterations = j + 1;

    const double scale = std::max(std::abs(result.largest), std::numeric_limits<double>::min());
    const double residual = beta * std::abs(tri.eigenvectors()(size - 1, size - 1));
    const bool exhausted = beta <= 1e-14 * scale || j + 1 == dim;
    if (residual <= tol * scale || exhausted) {
      result.converged = true;
      break;
    }
    offdiag.push_back(beta);
    q = w / beta;
  }
  result.largest = std::max(result.largest, 0.0);
  result.smallest = std::max(result.smallest, 0.0);
  return result;
}

Eigen::VectorXd dense_singular_values(const CsrMatrix& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a.to_dense());
  return svd.singularValues();
}

SpectralEstimate singular_extrema(const CsrMatrix& m, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("spectrum tolerance must be positive");
  const auto lanczos = lanczos_gram_extrema(m, tol, max_iter);

  SpectralEstimate est;
  est.sigma_max = std::sqrt(lanczos.largest);
  est.iterations_used = lanczos.iterations;
  est.converged = lanczos.converged;
  if (std::min(m.rows, m.cols) <= kDenseSigmaMinLimit) {
    est.sigma_min = dense_sigma_min(m);
    est.method = SpectrumMethod::dense;
  } else {
    est.sigma_min = std::sqrt(lanczos.smallest);
    est.method = SpectrumMethod::iterative;
  }
  est.sigma_min = std::min(est.sigma_min, est.sigma_max);
  return est;
}

SpectralEstimate singular_extrema(const TransformMatrix& m, double tol, int max_iter) {
  return singular_extrema(m.csr(), tol, max_iter);
}

double objective_gap(const SpectralEstimate& est) {
  return std::max(std::abs(est.sigma_max - 1.0), std::abs(est.sigma_min - 1.0));
}

}  // namespace convreg
