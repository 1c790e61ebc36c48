#include "stokes_mg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stokes_mg/kernels.hpp"

namespace stokes {

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < rows_; ++i) y[i] = kernels::dot(row(i), x.first(cols_));
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& o) const {
  DenseMatrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a != 0.0) kernels::axpy(a, o.row(k), r.row(i));
    }
  return r;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

LuFactorization LuFactorization::factor(DenseMatrix a) {
  if (a.rows() != a.cols()) throw Error("lu_factor: matrix is not square");
  const int n = a.rows();
  LuFactorization f;
  f.n_ = n;
  f.perm_.resize(n);
  std::iota(f.perm_.begin(), f.perm_.end(), 0);
  std::vector<double> scale(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (double v : a.row(i)) scale[i] = std::max(scale[i], std::abs(v));

  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (best == 0.0 || best < 1e-12 * scale[p]) {
      throw SingularMatrixError("lu_factor: singular matrix at elimination step " + std::to_string(k), k);
    }
    if (p != k) {
      std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(p).begin());
      std::swap(f.perm_[k], f.perm_[p]);
      std::swap(scale[k], scale[p]);
    }
    const double pivot = a(k, k);
    const auto tail_k = a.row(k).subspan(k + 1);
    for (int i = k + 1; i < n; ++i) {
      const double l = a(i, k) / pivot;
      a(i, k) = l;
      if (l != 0.0) kernels::axpy(-l, tail_k, a.row(i).subspan(k + 1));
    }
  }
  f.lu_ = std::move(a);
  return f;
}

void LuFactorization::solve(std::span<const double> b, std::span<double> x) const {
  // b and x must not alias; see solve_in_place
  for (int i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  for (int i = 0; i < n_; ++i) x[i] -= kernels::dot(lu_.row(i).first(i), x.first(i));
  for (int i = n_ - 1; i >= 0; --i) {
    const auto r = lu_.row(i);
    x[i] = (x[i] - kernels::dot(r.subspan(i + 1), x.subspan(i + 1, n_ - i - 1))) / r[i];
  }
}

void LuFactorization::solve_in_place(std::span<double> x) const {
  thread_local std::vector<double> tmp;
  tmp.assign(x.begin(), x.begin() + n_);
  solve(tmp, x);
}

}  // namespace stokes
