#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace convreg {

/// Compressed sparse row matrix with sorted column indices in every row.
/// Products use a fixed per-row summation order, so results are
/// reproducible bit-for-bit.
struct CsrMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int64_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// Value at (i, j), 0 when the position is not stored.
  double coeff(std::int64_t i, std::int64_t j) const;

  Eigen::MatrixXd to_dense() const;
};

/// y = A x
std::vector<double> multiply(const CsrMatrix& a, std::span<const double> x);
/// y = A^T x
std::vector<double> multiply_transposed(const CsrMatrix& a, std::span<const double> x);

CsrMatrix transpose(const CsrMatrix& a);

/// Row-by-row (Gustavson) sparse product A * B.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// A + shift * I for square A. Every diagonal position is stored in the result.
CsrMatrix add_identity(const CsrMatrix& a, double shift);

double frobenius_squared(const CsrMatrix& a);

}  // namespace convreg
