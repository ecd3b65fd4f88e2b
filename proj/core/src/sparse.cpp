#include "convreg/sparse.hpp"

#include <algorithm>
#include <stdexcept>

namespace convreg {

double CsrMatrix::coeff(std::int64_t i, std::int64_t j) const {
  const auto first = col_idx.begin() + row_ptr[i];
  const auto last = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (auto e = row_ptr[i]; e < row_ptr[i + 1]; ++e) dense(i, col_idx[e]) = values[e];
  }
  return dense;
}

std::vector<double> multiply(const CsrMatrix& a, std::span<const double> x) {
  if (static_cast<std::int64_t>(x.size()) != a.cols) {
    throw std::invalid_argument("matvec: vector length does not match matrix columns");
  }
  std::vector<double> y(static_cast<std::size_t>(a.rows), 0.0);
  for (std::int64_t i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    for (auto e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) acc += a.values[e] * x[a.col_idx[e]];
    y[i] = acc;
  }
  return y;
}

std::vector<double> multiply_transposed(const CsrMatrix& a, std::span<const double> x) {
  if (static_cast<std::int64_t>(x.size()) != a.rows) {
    throw std::invalid_argument("matvec: vector length does not match matrix rows");
  }
  std::vector<double> y(static_cast<std::size_t>(a.cols), 0.0);
  for (std::int64_t i = 0; i < a.rows; ++i) {
    const double xi = x[i];
    for (auto e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) y[a.col_idx[e]] += a.values[e] * xi;
  }
  return y;
}

CsrMatrix transpose(const CsrMatrix& a) {
  CsrMatrix t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.row_ptr.assign(static_cast<std::size_t>(a.cols) + 1, 0);
  for (auto j : a.col_idx) ++t.row_ptr[j + 1];
  for (std::int64_t j = 0; j < a.cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];

  t.col_idx.resize(a.nnz());
  t.values.resize(a.nnz());
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Walking rows of A in order keeps every row of A^T sorted.
  for (std::int64_t i = 0; i < a.rows; ++i) {
    for (auto e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const auto slot = next[a.col_idx[e]]++;
      t.col_idx[slot] = i;
      t.values[slot] = a.values[e];
    }
  }
  return t;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("sparse product: inner dimensions differ");

  CsrMatrix c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);

  std::vector<double> accum(static_cast<std::size_t>(b.cols), 0.0);
  std::vector<char> touched(static_cast<std::size_t>(b.cols), 0);
  std::vector<std::int64_t> pattern;

  for (std::int64_t i = 0; i < a.rows; ++i) {
    pattern.clear();
    for (auto ea = a.row_ptr[i]; ea < a.row_ptr[i + 1]; ++ea) {
      const double av = a.values[ea];
      const auto l = a.col_idx[ea];
      for (auto eb = b.row_ptr[l]; eb < b.row_ptr[l + 1]; ++eb) {
        const auto j = b.col_idx[eb];
        if (!touched[j]) {
          touched[j] = 1;
          pattern.push_back(j);
        }
        accum[j] += av * b.values[eb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (auto j : pattern) {
      c.col_idx.push_back(j);
      c.values.push_back(accum[j]);
      accum[j] = 0.0;
      touched[j] = 0;
    }
    c.row_ptr[i + 1] = static_cast<std::int64_t>(c.col_idx.size());
  }
  return c;
}

CsrMatrix add_identity(const CsrMatrix& a, double shift) {
  if (a.rows != a.cols) throw std::invalid_argument("add_identity: matrix is not square");
  CsrMatrix out;
  out.rows = a.rows;
  out.cols = a.cols;
  out.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
  out.col_idx.reserve(a.nnz() + static_cast<std::size_t>(a.rows));
  out.values.reserve(a.nnz() + static_cast<std::size_t>(a.rows));
  for (std::int64_t i = 0; i < a.rows; ++i) {
    bool placed = false;
    for (auto e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const auto j = a.col_idx[e];
      if (!placed && j > i) {
        out.col_idx.push_back(i);
        out.values.push_back(shift);
        placed = true;
      }
      out.col_idx.push_back(j);
      out.values.push_back(j == i ? a.values[e] + shift : a.values[e]);
      if (j == i) placed = true;
    }
    if (!placed) {
      out.col_idx.push_back(i);
      out.values.push_back(shift);
    }
    out.row_ptr[i + 1] = static_cast<std::int64_t>(out.col_idx.size());
  }
  return out;
}

double frobenius_squared(const CsrMatrix& a) {
  double acc = 0.0;
  for (double v : a.values) acc += v * v;
  return acc;
}

}  // namespace convreg
