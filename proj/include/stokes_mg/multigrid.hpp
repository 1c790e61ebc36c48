#pragma once

// Monolithic geometric multigrid on uniformly refined structured meshes.
//
// Level 0 is the 5x5 base mesh; level l has 5 * 2^l cells per side. Every
// level is rediscretized, transfers come from the natural embedding of the
// nested spaces, and relaxation is Chebyshev-accelerated additive Vanka.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stokes_mg/assembly.hpp"
#include "stokes_mg/krylov.hpp"
#include "stokes_mg/vanka.hpp"

namespace stokes {

inline constexpr int kBaseCellsPerSide = 5;

/// Entry (i, j) is fine dual functional i applied to coarse basis function j.
SparseMatrix build_prolongation(const FunctionSpace& coarse, const FunctionSpace& fine, const RefinementLink& link);
/// Block-diagonal velocity/pressure prolongation of the monolithic system.
SparseMatrix build_mixed_prolongation(const MixedSpace& coarse, const MixedSpace& fine, const RefinementLink& link);

/// Constant pressure, zero velocity.
std::vector<double> pressure_nullspace_vector(const MixedSpace& space);

enum class ChebyshevMode {
  degree,  // one Chebyshev polynomial of degree nu per relaxation stage
  repeat,  // nu damped steps, each of degree one
};

struct ChebyshevInterval {
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct MultigridOptions {
  int levels = 1;
  int smoothing = 2;  // nu
  ProblemConfig problem;
  Weighting weighting = Weighting::inverse_multiplicity;
  ChebyshevMode chebyshev = ChebyshevMode::degree;
  std::uint64_t seed = 0;
  int lambda_steps = 10;
};

struct Level {
  std::shared_ptr<const Mesh> mesh;
  MixedSpace space;
  BlockSystem system;
  PatchSet patches;
  ChebyshevInterval interval;
  SparseMatrix prolongation;  // from the next coarser level; empty on level 0
  NullspaceProjector nullspace;
};

class Hierarchy {
 public:
  /// levels >= 0 refinements above the base mesh; levels == 0 means a single direct-solve level.
  static Hierarchy build(Discretization d, int k, const MultigridOptions& opts);

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const Level& level(int l) const { return levels_[l]; }
  const Level& finest() const { return levels_.back(); }
  const MultigridOptions& options() const { return opts_; }

  /// One V(nu, nu) cycle from a zero initial guess on the finest level.
  void v_cycle(std::span<const double> b, std::span<double> z) const;
  /// Chebyshev-accelerated Vanka relaxation of degree `steps` on level l, updating x.
  void relax(int l, std::span<const double> b, std::span<double> x, int steps) const;
  /// Dense solve on level 0 with the constant pressure mode removed.
  void coarse_solve(std::span<const double> b, std::span<double> x) const;

 private:
  void cycle(int l, std::span<const double> b, std::span<double> x) const;

  MultigridOptions opts_;
  std::vector<Level> levels_;
  LuFactorization coarse_lu_;  // bordered with the pressure nullspace vector
};

/// Chebyshev iteration of degree `degree` for M^{-1} A on [lower, upper] from the given x.
void chebyshev(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
               std::span<double> x, int degree, double lower, double upper);

}  // namespace stokes
