#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "stokes_mg/dense.hpp"
#include "stokes_mg/krylov.hpp"
#include "stokes_mg/sparse.hpp"

using namespace stokes;

namespace {

LinearOperator matrix_op(const SparseMatrix& a) {
  return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

const LinearOperator identity_op = [](std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), y.begin());
};

SparseMatrix diagonal(std::vector<double> d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({int(i), int(i), d[i]});
  return SparseMatrix::from_triplets(int(d.size()), int(d.size()), t);
}

Eigen::MatrixXd random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = u(rng);
  return g * g.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

SparseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix d(int(e.rows()), int(e.cols()));
  for (int i = 0; i < e.rows(); ++i)
    for (int j = 0; j < e.cols(); ++j) d(i, j) = e(i, j);
  return SparseMatrix::from_dense(d);
}

std::vector<double> random_vec(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Fgmres, IdentityConvergesInOneIteration) {
  const SparseMatrix a = SparseMatrix::identity(7);
  const auto b = random_vec(7, 1);
  std::vector<double> x(7, 0.0);
  const KrylovReport r = fgmres(matrix_op(a), identity_op, b, x, {.rtol = 1e-12, .max_it = 10});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(x[i], b[i], 1e-14);
}

TEST(Fgmres, FiniteTerminationOnDiagonal) {
  const SparseMatrix a = diagonal({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto b = random_vec(10, 2);
  std::vector<double> x(10, 0.0);
  const KrylovReport r = fgmres(matrix_op(a), identity_op, b, x, {.rtol = 1e-12, .max_it = 50});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 10);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(x[i], b[i] / (i + 1), 1e-10);
  EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations + 1));
  EXPECT_LE(r.history.back(), 1e-12);
}

TEST(Fgmres, MonotoneResidualHistory) {
  const Eigen::MatrixXd e = random_spd(60, 3);
  const SparseMatrix a = from_eigen(e);
  const auto b = random_vec(60, 4);
  std::vector<double> x(60, 0.0);
  const KrylovReport r = fgmres(matrix_op(a), identity_op, b, x, {.rtol = 1e-10, .max_it = 60});
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1] * (1 + 1e-14));
}

TEST(Fgmres, SsorPreconditionedMatchesDenseSolve) {
  const int n = 100;
  const Eigen::MatrixXd e = random_spd(n, 5);
  const SparseMatrix a = from_eigen(e);
  // symmetric Gauss-Seidel sweep from a zero guess
  const LinearOperator ssor = [&](std::span<const double> r, std::span<double> z) {
    std::fill(z.begin(), z.end(), 0.0);
    for (int pass = 0; pass < 2; ++pass)
      for (int s = 0; s < n; ++s) {
        const int i = pass == 0 ? s : n - 1 - s;
        double acc = r[i];
        for (int j = 0; j < n; ++j)
          if (j != i) acc -= e(i, j) * z[j];
        z[i] = acc / e(i, i);
      }
  };
  const auto b = random_vec(n, 6);
  std::vector<double> x(n, 0.0);
  const KrylovReport r = fgmres(matrix_op(a), ssor, b, x, {.rtol = 1e-12, .max_it = 100});
  EXPECT_TRUE(r.converged);
  const Eigen::VectorXd ref = e.lu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
  EXPECT_LE((Eigen::Map<Eigen::VectorXd>(x.data(), n) - ref).norm(), 1e-8 * ref.norm());
}

TEST(Fgmres, AgreesWithRightPreconditionedGmres) {
  const int n = 50;
  const Eigen::MatrixXd e = random_spd(n, 7) + 0.3 * random_spd(n, 8).triangularView<Eigen::Upper>().toDenseMatrix();
  const SparseMatrix a = from_eigen(e);
  const Eigen::VectorXd dinv = e.diagonal().cwiseInverse();
  const LinearOperator jacobi = [&](std::span<const double> r, std::span<double> z) {
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  };
  const auto b = random_vec(n, 9);
  for (int its : {3, 8, 20}) {
    std::vector<double> x1(n, 0.0), x2(n, 0.0);
    fgmres(matrix_op(a), jacobi, b, x1, {.rtol = 0.0, .max_it = its});
    gmres_right(matrix_op(a), jacobi, b, x2, {.rtol = 0.0, .max_it = its});
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x1[i], x2[i], 1e-10);
  }
}

TEST(Fgmres, NullspaceProjection) {
  // singular Laplacian-like path graph with constant kernel
  const int n = 20;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    if (i > 0) t.push_back({i, i - 1, -1.0}), d += 1.0;
    if (i + 1 < n) t.push_back({i, i + 1, -1.0}), d += 1.0;
    t.push_back({i, i, d});
  }
  const SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  const NullspaceProjector ns({std::vector<double>(n, 1.0)});
  auto b = random_vec(n, 10);
  std::vector<double> x(n, 0.0);
  const KrylovReport r = fgmres(matrix_op(a), identity_op, b, x, {.rtol = 1e-10, .max_it = 40, .nullspace = &ns});
  EXPECT_TRUE(r.converged);
  double mean = 0.0;
  for (double v : x) mean += v;
  EXPECT_NEAR(mean, 0.0, 1e-10);
  ns.apply(b);
  const auto ax = a * x;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(ax[i], b[i], 1e-8);
}

TEST(Fgmres, MonitorCanFormIteratesAndStop) {
  const SparseMatrix a = diagonal({1, 2, 3, 4, 5, 6});
  const auto b = random_vec(6, 11);
  std::vector<double> x(6, 0.0);
  int calls = 0;
  const KrylovReport r = fgmres(matrix_op(a), identity_op, b, x,
                                {.rtol = 1e-14, .max_it = 6, .monitor = [&](int it, double, const IterateFn& f) {
                                   std::vector<double> xi(6);
                                   f(xi);
                                   ++calls;
                                   return it == 2;
                                 }});
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_FALSE(r.converged);
}

TEST(Nullspace, ProjectorProperties) {
  const NullspaceProjector p({random_vec(12, 1), random_vec(12, 2)});
  auto v = p.basis()[0];
  p.apply(v);
  for (double x : v) EXPECT_NEAR(x, 0.0, 1e-15);
  auto w = random_vec(12, 3);
  p.apply(w);
  auto w2 = w;
  p.apply(w2);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(w[i], w2[i], 1e-13);
  EXPECT_THROW(NullspaceProjector({std::vector<double>(3, 1.0), std::vector<double>(3, 2.0)}), Error);
}

TEST(LambdaMax, ExactOnSmallDiagonal) {
  const SparseMatrix a = diagonal({1, 2, 4});
  EXPECT_NEAR(estimate_lambda_max(matrix_op(a), identity_op, 3, 3, 1), 4.0, 1e-10);
  // breakdown before m steps uses the block built so far
  EXPECT_NEAR(estimate_lambda_max(matrix_op(a), identity_op, 3, 10, 1), 4.0, 1e-10);
}

TEST(LambdaMax, RitzBoundsOnSpd) {
  const int n = 80;
  const Eigen::MatrixXd e = random_spd(n, 13);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().maxCoeff();
  const SparseMatrix a = from_eigen(e);
  const double est = estimate_lambda_max(matrix_op(a), identity_op, n, 10, 42);
  EXPECT_LE(est, lmax * (1 + 1e-6));
  EXPECT_GE(est, 0.8 * lmax);
}

TEST(LambdaMax, ScalesWithOperator) {
  const int n = 30;
  const SparseMatrix a = from_eigen(random_spd(n, 14));
  const LinearOperator scaled = [&](std::span<const double> x, std::span<double> y) {
    a.multiply(x, y);
    for (double& v : y) v *= 4.0;
  };
  const double l1 = estimate_lambda_max(matrix_op(a), identity_op, n, 10, 5);
  const double l4 = estimate_lambda_max(scaled, identity_op, n, 10, 5);
  EXPECT_NEAR(l4, 4.0 * l1, 1e-12 * l4);
}
