#include "stokes_mg/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "stokes_mg/kernels.hpp"

namespace stokes {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) throw Error("triplet index out of range");
  std::stable_sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m(rows, cols);
  for (std::size_t i = 0; i < triplets.size();) {
    const int r = triplets[i].row, c = triplets[i].col;
    double s = 0.0;
    // duplicates are summed in input order
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) s += triplets[i].value;
    m.cols_idx_.push_back(c);
    m.vals_.push_back(s);
    ++m.row_ptr_[r + 1];
  }
  for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m.cols_idx_.push_back(i);
    m.vals_.push_back(1.0);
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& d, double drop) {
  SparseMatrix m(d.rows(), d.cols());
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.cols(); ++c)
      if (d(r, c) != 0.0 && std::abs(d(r, c)) >= drop) {
        m.cols_idx_.push_back(c);
        m.vals_.push_back(d(r, c));
      }
    m.row_ptr_[r + 1] = static_cast<int>(m.vals_.size());
  }
  return m;
}

double SparseMatrix::at(int r, int c) const {
  const auto cs = row_cols(r);
  const auto it = std::lower_bound(cs.begin(), cs.end(), c);
  if (it == cs.end() || *it != c) return 0.0;
  return vals_[row_ptr_[r] + (it - cs.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  kernels::csr_multiply(row_ptr_, cols_idx_, vals_, x.data(), y.data(), static_cast<std::size_t>(rows_));
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[cols_idx_[k]] += vals_[k] * xr;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  for (int c : cols_idx_) ++t.row_ptr_[c + 1];
  for (int r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
  t.cols_idx_.resize(vals_.size());
  t.vals_.resize(vals_.size());
  std::vector<int> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int slot = next[cols_idx_[k]]++;
      t.cols_idx_[slot] = r;
      t.vals_[slot] = vals_[k];
    }
  return t;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, cols_idx_[k]) = vals_[k];
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw Error("multiply: dimension mismatch");
  std::vector<Triplet> out;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<char> used(b.cols(), 0);
  std::vector<int> pattern;
  for (int r = 0; r < a.rows(); ++r) {
    pattern.clear();
    const auto ac = a.row_cols(r);
    const auto av = a.row_vals(r);
    for (std::size_t i = 0; i < ac.size(); ++i) {
      const auto bc = b.row_cols(ac[i]);
      const auto bv = b.row_vals(ac[i]);
      for (std::size_t j = 0; j < bc.size(); ++j) {
        if (!used[bc[j]]) {
          used[bc[j]] = 1;
          pattern.push_back(bc[j]);
        }
        acc[bc[j]] += av[i] * bv[j];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (int c : pattern) {
      out.push_back({r, c, acc[c]});
      acc[c] = 0.0;
      used[c] = 0;
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(out));
}

SparseMatrix triple_product(const SparseMatrix& p, const SparseMatrix& a) {
  return multiply(p.transpose(), multiply(a, p));
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("max_abs_difference: dimension mismatch");
  double m = 0.0;
  for (int r = 0; r < a.rows(); ++r) {
    const auto ac = a.row_cols(r), bc = b.row_cols(r);
    const auto av = a.row_vals(r), bv = b.row_vals(r);
    std::size_t i = 0, j = 0;
    while (i < ac.size() || j < bc.size()) {
      if (j == bc.size() || (i < ac.size() && ac[i] < bc[j])) {
        m = std::max(m, std::abs(av[i++]));
      } else if (i == ac.size() || bc[j] < ac[i]) {
        m = std::max(m, std::abs(bv[j++]));
      } else {
        m = std::max(m, std::abs(av[i++] - bv[j++]));
      }
    }
  }
  return m;
}

DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const int> rows, std::span<const int> cols) {
  DenseMatrix d(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto rc = a.row_cols(rows[i]);
    const auto rv = a.row_vals(rows[i]);
    // merge two sorted lists
    std::size_t p = 0, q = 0;
    while (p < rc.size() && q < cols.size()) {
      if (rc[p] < cols[q]) {
        ++p;
      } else if (cols[q] < rc[p]) {
        ++q;
      } else {
        d(static_cast<int>(i), static_cast<int>(q)) = rv[p];
        ++p;
        ++q;
      }
    }
  }
  return d;
}

}  // namespace stokes
