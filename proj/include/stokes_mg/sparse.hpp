#pragma once

// Compressed-row sparse matrices.

#include <span>
#include <vector>

#include "stokes_mg/dense.hpp"

namespace stokes {

struct Triplet {
  int row;
  int col;
  double value;
};

/// CSR matrix with strictly increasing column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Duplicates are summed; explicit zeros are kept.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(int n);
  static SparseMatrix from_dense(const DenseMatrix& d, double drop = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return vals_.size(); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_indices() const { return cols_idx_; }
  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

  std::span<const int> row_cols(int r) const {
    return {cols_idx_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  std::span<const double> row_vals(int r) const {
    return {vals_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  /// Entry (r, c), zero if not stored.
  double at(int r, int c) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_idx_;
  std::vector<double> vals_;
};

/// C = A B
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// P^T A P
SparseMatrix triple_product(const SparseMatrix& p, const SparseMatrix& a);
/// max over entries of |A - B|, treating absent entries as zero.
double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b);
/// Dense block A[rows, cols]; index lists sorted ascending.
DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const int> rows, std::span<const int> cols);

}  // namespace stokes
