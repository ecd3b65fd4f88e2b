#include "convreg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace convreg {

void RegularizerConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite value >= 0");
  if (n < 1) throw ConfigError("input size N must be at least 1");
}

double PenaltyGradient::frobenius_norm() const { return std::sqrt(squared_norm(values.values())); }

namespace {

Kernel zero_like(const Kernel& kernel) { return Kernel(kernel.k(), kernel.g(), kernel.h()); }

}  // namespace

double penalty(const Kernel& kernel, const RegularizerConfig& cfg) {
  cfg.validate();
  const auto m = build_transform(kernel, cfg.n);
  return frobenius_squared(add_identity(gram(m), -cfg.alpha));
}

PenaltyGradient gradient_direct(const Kernel& kernel, const RegularizerConfig& cfg) {
  cfg.validate();
  const auto m = build_transform(kernel, cfg.n);
  const Eigen::MatrixXd dense = m.csr().to_dense();
  const Eigen::Index dim = dense.cols();
  Eigen::MatrixXd e = dense.transpose() * dense;
  e.diagonal().array() -= cfg.alpha;

  PenaltyGradient out{zero_like(kernel), cfg.alpha, e.squaredNorm()};
  auto grad = out.values.values();
  for (std::size_t flat = 0; flat < kernel.size(); ++flat) {
    double acc = 0.0;
    for (auto entry : m.omega_entries(flat)) {
      const auto i = m.entry_row(entry);
      const auto j = m.csr().col_idx[entry];
      double row_term = 0.0;
      for (Eigen::Index t = 0; t < dim; ++t) row_term += e(j, t) * dense(i, t);
      double col_term = 0.0;
      for (Eigen::Index s = 0; s < dim; ++s) col_term += e(s, j) * dense(i, s);
      acc += row_term + col_term;
    }
    grad[flat] = 2.0 * acc;
  }
  return out;
}

PenaltyGradient gradient_fast(const Kernel& kernel, const RegularizerConfig& cfg) {
  PenaltyEvaluator evaluator(kernel, cfg);
  return evaluator.evaluate(kernel);
}

PenaltyGradient gradient_fd(const Kernel& kernel, const RegularizerConfig& cfg, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  PenaltyEvaluator evaluator(kernel, cfg);
  PenaltyGradient out{zero_like(kernel), cfg.alpha, evaluator.penalty(kernel)};
  Kernel probe = kernel;
  auto grad = out.values.values();
  for (std::size_t flat = 0; flat < kernel.size(); ++flat) {
    const double base = kernel.values()[flat];
    probe.values()[flat] = base + step;
    const double up = evaluator.penalty(probe);
    probe.values()[flat] = base - step;
    const double down = evaluator.penalty(probe);
    probe.values()[flat] = base;
    grad[flat] = (up - down) / (2.0 * step);
  }
  return out;
}

PenaltyEvaluator::PenaltyEvaluator(const Kernel& kernel, const RegularizerConfig& cfg)
    : cfg_(cfg), matrix_((cfg.validate(), kernel), cfg.n) {}

double PenaltyEvaluator::penalty(const Kernel& kernel) {
  matrix_.refresh(kernel);
  return frobenius_squared(add_identity(gram(matrix_), -cfg_.alpha));
}

PenaltyGradient PenaltyEvaluator::evaluate(const Kernel& kernel) {
  matrix_.refresh(kernel);
  const CsrMatrix& m = matrix_.csr();
  const CsrMatrix e = add_identity(gram(matrix_), -cfg_.alpha);

  PenaltyGradient out{zero_like(kernel), cfg_.alpha, frobenius_squared(e)};
  auto grad = out.values.values();
  const auto source = matrix_.entry_source();

  // Row i of M E, accumulated densely, then read back on the pattern of row i
  // of M. E is symmetric, so row l of E doubles as column l.
  accum_.assign(static_cast<std::size_t>(e.cols), 0.0);
  for (std::int64_t i = 0; i < m.rows; ++i) {
    for (auto a = m.row_ptr[i]; a < m.row_ptr[i + 1]; ++a) {
      const double mv = m.values[a];
      const auto l = m.col_idx[a];
      for (auto b = e.row_ptr[l]; b < e.row_ptr[l + 1]; ++b) accum_[e.col_idx[b]] += mv * e.values[b];
    }
    for (auto a = m.row_ptr[i]; a < m.row_ptr[i + 1]; ++a) {
      grad[source[a]] += 4.0 * accum_[m.col_idx[a]];
    }
    for (auto a = m.row_ptr[i]; a < m.row_ptr[i + 1]; ++a) {
      const auto l = m.col_idx[a];
      for (auto b = e.row_ptr[l]; b < e.row_ptr[l + 1]; ++b) accum_[e.col_idx[b]] = 0.0;
    }
  }
  return out;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: length mismatch");
  double diff = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  if (diff == 0.0) return 0.0;
  if (scale == 0.0) return std::numeric_limits<double>::infinity();
  return diff / scale;
}

Eigen::MatrixXd frobenius_sq_derivative(const Eigen::MatrixXd& a) { return 2.0 * a; }

Eigen::MatrixXd gram_entry_derivative(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd eij = Eigen::MatrixXd::Zero(a.rows(), n);
  eij(i, j) = 1.0;
  return a.transpose() * eij + eij.transpose() * a;
}

}  // namespace convreg
