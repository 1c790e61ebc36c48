#include "stokes_mg/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "stokes_mg/common.hpp"
#include "stokes_mg/kernels.hpp"

namespace stokes {

namespace {

double norm2(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }

void scale(std::span<double> x, double a) {
  for (double& v : x) v *= a;
}

// Shared driver: flexible stores the preconditioned vectors, otherwise the
// preconditioner is applied once to the combined update.
KrylovReport gmres_impl(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                        std::span<double> x, const KrylovOptions& opts, bool flexible) {
  const std::size_t n = b.size();
  if (x.size() != n) throw Error("gmres: size mismatch");
  const NullspaceProjector* ns = opts.nullspace;
  KrylovReport rep;
  const int m = std::max(opts.max_it, 0);

  std::vector<std::vector<double>> v, z;
  std::vector<double> r(n), w(n);
  if (ns) ns->apply(x);
  a(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  if (ns) ns->apply(r);
  const double beta = norm2(r);
  rep.history.push_back(1.0);
  if (beta == 0.0) {
    rep.relative_residual = 0.0;
    rep.converged = true;
    return rep;
  }
  scale(r, 1.0 / beta);
  v.push_back(r);

  std::vector<std::vector<double>> h;  // columns of the Hessenberg matrix, rotated into R
  std::vector<double> cs, sn, g{beta};
  const std::vector<double> x0(x.begin(), x.end());

  auto solve_upper = [&](int k) {
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[j][i] * y[j];
      y[i] = s / h[i][i];
    }
    return y;
  };
  auto form = [&](int k, std::span<double> out) {
    const std::vector<double> y = solve_upper(k);
    std::copy(x0.begin(), x0.end(), out.begin());
    if (flexible) {
      for (int j = 0; j < k; ++j) kernels::axpy(y[j], z[j], out);
    } else {
      std::vector<double> u(n, 0.0), mu(n);
      for (int j = 0; j < k; ++j) kernels::axpy(y[j], v[j], u);
      precond(u, mu);
      kernels::axpy(1.0, mu, out);
    }
    if (ns) ns->apply(out);
  };

  int k = 0;
  std::vector<double> zj(n);
  while (k < m) {
    precond(v[k], zj);
    a(zj, w);
    if (flexible) z.push_back(zj);
    if (ns) ns->apply(w);
    const double wnorm0 = norm2(w);
    std::vector<double> col(k + 2, 0.0);
    for (int i = 0; i <= k; ++i) {
      col[i] = kernels::dot(w, v[i]);
      kernels::axpy(-col[i], v[i], w);
    }
    col[k + 1] = norm2(w);
    const double hnext = col[k + 1];
    const bool lucky = hnext <= 1e-14 * wnorm0;
    // apply previous rotations, then a new one
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * col[i] + sn[i] * col[i + 1];
      col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
      col[i] = t;
    }
    const double d = std::hypot(col[k], col[k + 1]);
    const double c = d == 0.0 ? 1.0 : col[k] / d, s = d == 0.0 ? 0.0 : col[k + 1] / d;
    cs.push_back(c);
    sn.push_back(s);
    col[k] = d;
    col[k + 1] = 0.0;
    g.push_back(-s * g[k]);
    g[k] *= c;
    h.push_back(std::move(col));
    ++k;
    const double rel = std::abs(g[k]) / beta;
    rep.history.push_back(rel);
    rep.relative_residual = rel;
    rep.iterations = k;
    if (lucky) {
      rep.breakdown = true;
      rep.converged = true;
    } else if (rel <= opts.rtol) {
      rep.converged = true;
    }
    if (opts.monitor) {
      const IterateFn it = [&, k](std::span<double> out) { form(k, out); };
      if (opts.monitor(k, rel, it)) break;
    }
    if (rep.converged) break;
    scale(w, 1.0 / hnext);
    v.push_back(w);
  }
  if (k > 0) form(k, x);
  return rep;
}

}  // namespace

NullspaceProjector::NullspaceProjector(std::vector<std::vector<double>> basis) {
  for (auto& b : basis) {
    for (const auto& q : q_) kernels::axpy(-kernels::dot(b, q), q, b);
    const double nb = norm2(b);
    if (nb < 1e-12) throw Error("nullspace basis vectors are linearly dependent");
    scale(b, 1.0 / nb);
    q_.push_back(std::move(b));
  }
}

void NullspaceProjector::apply(std::span<double> x) const {
  for (const auto& q : q_) kernels::axpy(-kernels::dot(x, q), q, x);
}

KrylovReport fgmres(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                    std::span<double> x, const KrylovOptions& opts) {
  return gmres_impl(a, precond, b, x, opts, true);
}

KrylovReport gmres_right(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                         std::span<double> x, const KrylovOptions& opts) {
  return gmres_impl(a, precond, b, x, opts, false);
}

double estimate_lambda_max(const LinearOperator& a, const LinearOperator& precond, int n, int steps,
                           std::uint64_t seed, const NullspaceProjector* nullspace) {
  if (steps < 1) throw Error("estimate_lambda_max needs at least one step");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v0(n);
  for (double& e : v0) e = dist(rng);
  if (nullspace) nullspace->apply(v0);
  scale(v0, 1.0 / norm2(v0));
  std::vector<std::vector<double>> v{v0};
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(steps + 1, steps);
  std::vector<double> z(n), w(n);
  int done = 0;
  for (int j = 0; j < steps; ++j) {
    precond(v[j], z);
    a(z, w);
    if (nullspace) nullspace->apply(w);
    const double w0 = norm2(w);
    for (int i = 0; i <= j; ++i) {
      H(i, j) = kernels::dot(w, v[i]);
      kernels::axpy(-H(i, j), v[i], w);
    }
    H(j + 1, j) = norm2(w);
    done = j + 1;
    if (H(j + 1, j) <= 1e-14 * w0) break;
    scale(w, 1.0 / H(j + 1, j));
    v.push_back(w);
  }
  const Eigen::MatrixXd block = H.topLeftCorner(done, done);
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(block, false).eigenvalues();
  double lam = 0.0;
  for (int i = 0; i < eig.size(); ++i) lam = std::max(lam, std::abs(eig[i]));
  return lam;
}

}  // namespace stokes
