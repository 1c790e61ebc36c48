#pragma once

// Monolithic Stokes operators [[A, B^T], [B, 0]] with velocity DoFs first.
//
// Taylor-Hood uses a(u, v) = 2 nu (eps(u), eps(v)) and b(v, q) = -(div v, q)
// with Dirichlet data on the whole boundary. The H(div) pairs add the
// symmetric interior-penalty terms on interior edges and impose u.n = 0
// strongly.

#include <functional>
#include <vector>

#include "stokes_mg/space.hpp"
#include "stokes_mg/sparse.hpp"

namespace stokes {

struct ProblemConfig {
  double viscosity = 1.0;
  /// Interior-penalty parameter; non-positive selects default_alpha(k).
  double alpha = 0.0;
};

double default_alpha(int k);

/// u = (sin(pi x) cos(pi y), -cos(pi x) sin(pi y)), p = 0, f = 2 pi^2 nu u.
namespace manufactured {
Vec2 velocity(Point x);
/// grad(i, j) = d u_i / d x_j
Mat2 velocity_gradient(Point x);
double pressure(Point x);
Vec2 forcing(Point x, double viscosity);
}  // namespace manufactured

struct BlockSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  StrongBc bc;
  /// One flag per unknown of the monolithic system.
  std::vector<char> constrained;
};

using VectorField = std::function<Vec2(Point)>;

/// With apply_bc false the raw operator is returned (no rows eliminated, empty bc).
BlockSystem assemble_taylor_hood(const MixedSpace& space, const ProblemConfig& cfg, const VectorField& f,
                                 const VectorField& g, bool apply_bc = true);
BlockSystem assemble_hdiv(const MixedSpace& space, const ProblemConfig& cfg, const VectorField& f,
                          bool apply_bc = true);
/// Dispatches on the discretization with the manufactured data.
BlockSystem assemble(const MixedSpace& space, const ProblemConfig& cfg, bool apply_bc = true);

/// Traces of both adjacent cells' velocity bases at shared points of an
/// interior edge. Points follow the global edge orientation; side 0 is the
/// lower-numbered cell and the normal points from side 0 to side 1.
struct FacetTables {
  std::array<int, 2> cells{};
  std::array<Tabulation, 2> side;
  std::vector<Point> points;
  std::vector<double> weights;  // physical line weights
  Vec2 normal, tangent;
  double length = 0.0;
};

/// Throws stokes::Error on a boundary edge.
FacetTables jump_average_tables(const FunctionSpace& velocity, int edge, int quadrature_degree);

}  // namespace stokes
