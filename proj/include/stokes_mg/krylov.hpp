#pragma once

// Flexible GMRES, right-preconditioned GMRES and Arnoldi eigenvalue estimates.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stokes {

/// y = Op(x); x and y never alias.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

/// Orthogonal projector I - Q Q^T onto the complement of span(basis).
class NullspaceProjector {
 public:
  NullspaceProjector() = default;
  /// Throws stokes::Error if the vectors are linearly dependent.
  explicit NullspaceProjector(std::vector<std::vector<double>> basis);

  bool empty() const { return q_.empty(); }
  const std::vector<std::vector<double>>& basis() const { return q_; }
  void apply(std::span<double> x) const;

 private:
  std::vector<std::vector<double>> q_;
};

struct KrylovReport {
  int iterations = 0;
  double relative_residual = 1.0;
  bool converged = false;
  /// Arnoldi produced a zero new direction; the solution is exact in the subspace.
  bool breakdown = false;
  /// Relative residual estimate after each iteration, starting with 1.
  std::vector<double> history;
};

/// Forms the current iterate into the given vector.
using IterateFn = std::function<void(std::span<double> x)>;
/// Called after every iteration; return true to stop early.
using KrylovMonitor = std::function<bool(int iteration, double relative_residual, const IterateFn& iterate)>;

struct KrylovOptions {
  double rtol = 1e-10;
  int max_it = 100;
  const NullspaceProjector* nullspace = nullptr;
  KrylovMonitor monitor;
};

/// Unrestarted flexible GMRES with modified Gram-Schmidt. x holds the initial
/// guess on entry and the solution on exit. Residuals are relative to the
/// initial residual.
KrylovReport fgmres(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                    std::span<double> x, const KrylovOptions& opts);

/// Unrestarted right-preconditioned GMRES, for a fixed preconditioner.
KrylovReport gmres_right(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
                         std::span<double> x, const KrylovOptions& opts);

/// Largest-magnitude eigenvalue of the Hessenberg matrix of `steps` Arnoldi
/// steps on a * precond, started from a seeded pseudorandom vector.
double estimate_lambda_max(const LinearOperator& a, const LinearOperator& precond, int n, int steps,
                           std::uint64_t seed, const NullspaceProjector* nullspace = nullptr);

}  // namespace stokes
