#pragma once

#include <utility>
#include <vector>

#include "stokes_mg/common.hpp"
#include "stokes_mg/mesh.hpp"

namespace stokes {

/// Legendre polynomial P_n and its derivative at t in [-1, 1].
std::pair<double, double> legendre(int n, double t);

/// Shifted Legendre polynomial on [0, 1] and its derivative with respect to s.
inline std::pair<double, double> shifted_legendre(int n, double s) {
  auto [p, dp] = legendre(n, 2.0 * s - 1.0);
  return {p, 2.0 * dp};
}

struct LineRule {
  std::vector<double> points;  // in [0, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `npoints` nodes on [0, 1].
LineRule gauss_legendre(int npoints);
/// Gauss-Legendre rule on [0, 1] exact up to `degree`.
LineRule make_line_quadrature(int degree);

struct QuadratureRule {
  CellShape shape = CellShape::triangle;
  int degree = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

inline constexpr int kMaxQuadratureDegree = 20;

/// Tensor Gauss-Legendre on the unit square, collapsed (Duffy) Gauss-Legendre
/// on the reference triangle (0,0), (1,0), (0,1).
QuadratureRule make_quadrature(CellShape shape, int degree);

}  // namespace stokes
