#include "stokes_mg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace stokes {

std::pair<double, double> legendre(int n, double t) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = t;
  double d0 = 0.0, d1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

LineRule gauss_legendre(int npoints) {
  if (npoints < 1) throw Error("gauss_legendre: need at least one point");
  LineRule rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(npoints, t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const auto [p, dp] = legendre(npoints, t);
    // ascending order on [0, 1]
    const int slot = npoints - 1 - i;
    rule.points[slot] = 0.5 * (t + 1.0);
    rule.weights[slot] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return rule;
}

LineRule make_line_quadrature(int degree) { return gauss_legendre(degree / 2 + 1); }

namespace {

QuadratureRule build(CellShape shape, int degree) {
  QuadratureRule q;
  q.shape = shape;
  q.degree = degree;
  if (shape == CellShape::quadrilateral) {
    const LineRule r = make_line_quadrature(degree);
    for (std::size_t j = 0; j < r.points.size(); ++j)
      for (std::size_t i = 0; i < r.points.size(); ++i) {
        q.points.push_back({r.points[i], r.points[j]});
        q.weights.push_back(r.weights[i] * r.weights[j]);
      }
  } else {
    // x = xi (1 - eta), y = eta, dx dy = (1 - eta) dxi deta
    const LineRule rx = make_line_quadrature(degree);
    const LineRule ry = make_line_quadrature(degree + 1);
    for (std::size_t j = 0; j < ry.points.size(); ++j)
      for (std::size_t i = 0; i < rx.points.size(); ++i) {
        const double eta = ry.points[j];
        q.points.push_back({rx.points[i] * (1.0 - eta), eta});
        q.weights.push_back(rx.weights[i] * ry.weights[j] * (1.0 - eta));
      }
  }
  return q;
}

}  // namespace

QuadratureRule make_quadrature(CellShape shape, int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw Error("make_quadrature: unsupported degree " + std::to_string(degree));
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(static_cast<int>(shape), degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build(shape, degree)).first;
  return it->second;
}

}  // namespace stokes
