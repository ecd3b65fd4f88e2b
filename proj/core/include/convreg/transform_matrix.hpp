#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convreg/sparse.hpp"
#include "convreg/tensor.hpp"

namespace convreg {

/// Shape of the convolution realized by a transform matrix.
struct Geometry {
  int k = 1;
  int g = 1;
  int h = 1;
  int n = 1;

  int m() const { return (k + 1) / 2; }
  std::int64_t rows() const { return static_cast<std::int64_t>(h) * n * n; }
  std::int64_t cols() const { return static_cast<std::int64_t>(g) * n * n; }

  bool operator==(const Geometry&) const = default;
};

/// A position (row, col) of M, 0-based.
using MatrixPosition = std::pair<std::int64_t, std::int64_t>;

/// The (h N^2) x (g N^2) matrix M with vec(K * X) = M vec(X).
///
/// Every (y, z) channel block is doubly block banded Toeplitz. Each stored
/// entry remembers the kernel coordinate it was copied from, and the omega
/// index groups the stored entries by kernel coordinate, so a kernel update
/// only rewrites values and never re-derives structure.
class TransformMatrix {
 public:
  TransformMatrix(const Kernel& kernel, int n);

  const Geometry& geometry() const { return geometry_; }
  const CsrMatrix& csr() const { return csr_; }
  std::int64_t rows() const { return csr_.rows; }
  std::int64_t cols() const { return csr_.cols; }
  std::size_t nnz() const { return csr_.nnz(); }

  /// Flat kernel index (Kernel::index) that stored entry e carries.
  std::span<const std::int32_t> entry_source() const { return source_; }

  /// Stored-entry ids carrying kernel entry `flat` (a Kernel::index value).
  std::span<const std::int64_t> omega_entries(std::size_t flat) const {
    return {omega_entries_.data() + omega_ptr_[flat],
            omega_entries_.data() + omega_ptr_[flat + 1]};
  }

  /// Positions (i, j) of M holding K(p, q, z, y). Throws std::out_of_range
  /// for coordinates outside the kernel.
  std::vector<MatrixPosition> omega_lookup(int p, int q, int z, int y) const;

  /// Row index of stored entry e.
  std::int64_t entry_row(std::int64_t e) const { return entry_row_[e]; }

  /// Rewrites all values from a kernel of the same shape.
  void refresh(const Kernel& kernel);

 private:
  Geometry geometry_;
  CsrMatrix csr_;
  std::vector<std::int32_t> source_;
  std::vector<std::int64_t> entry_row_;
  std::vector<std::int64_t> omega_ptr_;
  std::vector<std::int64_t> omega_entries_;
};

TransformMatrix build_transform(const Kernel& kernel, int n);

/// M x with x of length g N^2.
std::vector<double> matvec(const TransformMatrix& m, std::span<const double> x);

/// M^T M, stored with all structurally possible entries.
CsrMatrix gram(const TransformMatrix& m);

/// |Omega_{p,q}| = (N - |p - m|) (N - |q - m|) with 1-based p, q, clipped at 0.
std::int64_t omega_cardinality(int k, int n, int p, int q);

/// Sum of omega_cardinality over all kernel coordinates.
std::int64_t expected_nnz(const Geometry& geometry);

/// Coordinate text format: header "rows cols nnz", then "i j value" per
/// entry with 1-based indices and 17 significant digits.
void write_coordinate(std::ostream& out, const CsrMatrix& matrix);
void save_coordinate(const std::string& path, const CsrMatrix& matrix);

}  // namespace convreg
