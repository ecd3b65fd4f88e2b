#include "convreg/transform_matrix.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "convreg/format.hpp"

namespace convreg {

TransformMatrix::TransformMatrix(const Kernel& kernel, int n) {
  if (n < 1) throw ConfigError("input size N must be at least 1");
  geometry_ = Geometry{kernel.k(), kernel.g(), kernel.h(), n};

  const int k = kernel.k();
  const int c = kernel.center();
  const std::int64_t plane = static_cast<std::int64_t>(n) * n;

  csr_.rows = geometry_.rows();
  csr_.cols = geometry_.cols();
  csr_.row_ptr.assign(static_cast<std::size_t>(csr_.rows) + 1, 0);
  const auto reserve = static_cast<std::size_t>(expected_nnz(geometry_));
  csr_.col_idx.reserve(reserve);
  csr_.values.reserve(reserve);
  source_.reserve(reserve);
  entry_row_.reserve(reserve);

  // Row (y, r, s) collects X(r - c + p, s - c + q, z) * K(p, q, z, y). Looping
  // z, then p, then q visits columns (z, r', s') in increasing order.
  for (int y = 0; y < kernel.h(); ++y) {
    for (int r = 0; r < n; ++r) {
      for (int s = 0; s < n; ++s) {
        const std::int64_t row = y * plane + static_cast<std::int64_t>(r) * n + s;
        for (int z = 0; z < kernel.g(); ++z) {
          for (int p = 0; p < k; ++p) {
            const int rr = r - c + p;
            if (rr < 0 || rr >= n) continue;
            for (int q = 0; q < k; ++q) {
              const int ss = s - c + q;
              if (ss < 0 || ss >= n) continue;
              const auto flat = kernel.index(p, q, z, y);
              csr_.col_idx.push_back(z * plane + static_cast<std::int64_t>(rr) * n + ss);
              csr_.values.push_back(kernel.values()[flat]);
              source_.push_back(static_cast<std::int32_t>(flat));
              entry_row_.push_back(row);
            }
          }
        }
        csr_.row_ptr[row + 1] = static_cast<std::int64_t>(csr_.col_idx.size());
      }
    }
  }

  // Bucket the stored entries by kernel coordinate.
  omega_ptr_.assign(kernel.size() + 1, 0);
  for (auto src : source_) ++omega_ptr_[static_cast<std::size_t>(src) + 1];
  for (std::size_t f = 0; f < kernel.size(); ++f) omega_ptr_[f + 1] += omega_ptr_[f];
  omega_entries_.resize(source_.size());
  std::vector<std::int64_t> next(omega_ptr_.begin(), omega_ptr_.end() - 1);
  for (std::size_t e = 0; e < source_.size(); ++e) {
    omega_entries_[next[source_[e]]++] = static_cast<std::int64_t>(e);
  }
}

std::vector<MatrixPosition> TransformMatrix::omega_lookup(int p, int q, int z, int y) const {
  const auto& geo = geometry_;
  if (p < 0 || q < 0 || z < 0 || y < 0 || p >= geo.k || q >= geo.k || z >= geo.g || y >= geo.h) {
    throw std::out_of_range("kernel coordinate out of range");
  }
  const auto flat = ((static_cast<std::size_t>(p) * geo.k + q) * geo.g + z) * geo.h + y;
  std::vector<MatrixPosition> positions;
  for (auto e : omega_entries(flat)) positions.emplace_back(entry_row_[e], csr_.col_idx[e]);
  return positions;
}

void TransformMatrix::refresh(const Kernel& kernel) {
  if (kernel.k() != geometry_.k || kernel.g() != geometry_.g || kernel.h() != geometry_.h) {
    throw ConfigError("refresh: kernel shape differs from the matrix geometry");
  }
  const auto values = kernel.values();
  for (std::size_t e = 0; e < source_.size(); ++e) csr_.values[e] = values[source_[e]];
}

TransformMatrix build_transform(const Kernel& kernel, int n) { return TransformMatrix(kernel, n); }

std::vector<double> matvec(const TransformMatrix& m, std::span<const double> x) {
  return multiply(m.csr(), x);
}

CsrMatrix gram(const TransformMatrix& m) { return multiply(transpose(m.csr()), m.csr()); }

std::int64_t omega_cardinality(int k, int n, int p, int q) {
  const int m = (k + 1) / 2;
  const auto rows = std::max<std::int64_t>(0, n - std::abs(p - m));
  const auto cols = std::max<std::int64_t>(0, n - std::abs(q - m));
  return rows * cols;
}

std::int64_t expected_nnz(const Geometry& geometry) {
  std::int64_t total = 0;
  for (int p = 1; p <= geometry.k; ++p) {
    for (int q = 1; q <= geometry.k; ++q) total += omega_cardinality(geometry.k, geometry.n, p, q);
  }
  return total * geometry.g * geometry.h;
}

void write_coordinate(std::ostream& out, const CsrMatrix& matrix) {
  out << matrix.rows << ' ' << matrix.cols << ' ' << matrix.nnz() << '\n';
  for (std::int64_t i = 0; i < matrix.rows; ++i) {
    for (auto e = matrix.row_ptr[i]; e < matrix.row_ptr[i + 1]; ++e) {
      out << (i + 1) << ' ' << (matrix.col_idx[e] + 1) << ' ' << format_g17(matrix.values[e]) << '\n';
    }
  }
}

void save_coordinate(const std::string& path, const CsrMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_coordinate(out, matrix);
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace convreg
