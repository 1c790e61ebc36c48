#pragma once

#include <span>
#include <string>
#include <vector>

#include "stokes_mg/common.hpp"

namespace stokes {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static DenseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  DenseMatrix operator*(const DenseMatrix& o) const;
  DenseMatrix transpose() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Raised when a pivot falls below 1e-12 times the largest entry of its row.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// LU factorization with partial pivoting, P A = L U, L unit lower triangular.
class LuFactorization {
 public:
  LuFactorization() = default;
  static LuFactorization factor(DenseMatrix a);

  int size() const { return n_; }
  void solve(std::span<const double> b, std::span<double> x) const;
  void solve_in_place(std::span<double> x) const;
  /// Packed factors: strict lower part holds L, upper part holds U.
  const DenseMatrix& packed() const { return lu_; }
  /// perm()[i] is the original row placed at position i.
  const std::vector<int>& perm() const { return perm_; }

 private:
  int n_ = 0;
  DenseMatrix lu_;
  std::vector<int> perm_;
};

}  // namespace stokes
