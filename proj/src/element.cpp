#include "stokes_mg/element.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "stokes_mg/quadrature.hpp"

namespace stokes {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::lagrange: return "lagrange";
    case Family::discontinuous_lagrange: return "discontinuous-lagrange";
    case Family::bdm: return "bdm";
    case Family::rt: return "rt";
  }
  return "?";
}

namespace reference {

namespace {
constexpr std::array<Point, 3> kTriVertices{Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0}};
constexpr std::array<Point, 4> kQuadVertices{Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0}, Point{1.0, 1.0}};
constexpr std::array<std::array<int, 2>, 3> kTriEdges{{{1, 2}, {0, 2}, {0, 1}}};
constexpr std::array<std::array<int, 2>, 4> kQuadEdges{{{0, 2}, {1, 3}, {0, 1}, {2, 3}}};
}  // namespace

std::span<const Point> vertices(CellShape shape) {
  if (shape == CellShape::triangle) return kTriVertices;
  return kQuadVertices;
}

std::array<int, 2> edge_vertices(CellShape shape, int e) {
  return shape == CellShape::triangle ? kTriEdges[e] : kQuadEdges[e];
}

Vec2 edge_normal(CellShape shape, int e) {
  if (shape == CellShape::triangle) {
    static const std::array<Vec2, 3> n{Vec2{M_SQRT1_2, M_SQRT1_2}, Vec2{-1.0, 0.0}, Vec2{0.0, -1.0}};
    return n[e];
  }
  static const std::array<Vec2, 4> n{Vec2{-1.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, -1.0}, Vec2{0.0, 1.0}};
  return n[e];
}

double edge_length(CellShape shape, int e) { return shape == CellShape::triangle && e == 0 ? M_SQRT2 : 1.0; }

double measure(CellShape shape) { return shape == CellShape::triangle ? 0.5 : 1.0; }

}  // namespace reference

namespace {

std::vector<std::array<int, 2>> triangle_degrees(int K) {
  std::vector<std::array<int, 2>> d;
  for (int total = 0; total <= K; ++total)
    for (int j = 0; j <= total; ++j) d.push_back({total - j, j});
  return d;
}

std::vector<std::array<int, 2>> square_degrees(int K) {
  std::vector<std::array<int, 2>> d;
  for (int j = 0; j <= K; ++j)
    for (int i = 0; i <= K; ++i) d.push_back({i, j});
  return d;
}

void eval_square_basis(const std::vector<std::array<int, 2>>& degrees, Point p, std::vector<double>& v,
                       std::vector<Vec2>& g) {
  int maxd = 0;
  for (auto [i, j] : degrees) maxd = std::max({maxd, i, j});
  std::vector<std::pair<double, double>> lx(maxd + 1), ly(maxd + 1);
  for (int d = 0; d <= maxd; ++d) {
    lx[d] = shifted_legendre(d, p.x);
    ly[d] = shifted_legendre(d, p.y);
  }
  v.resize(degrees.size());
  g.resize(degrees.size());
  for (std::size_t m = 0; m < degrees.size(); ++m) {
    const auto [i, j] = degrees[m];
    v[m] = lx[i].first * ly[j].first;
    g[m] = {lx[i].second * ly[j].first, lx[i].first * ly[j].second};
  }
}

// Jacobi P_n^{(a,0)}(z) and its derivative for n = 0..N.
void jacobi(int N, double a, double z, std::vector<double>& P, std::vector<double>& dP) {
  P.assign(N + 1, 0.0);
  dP.assign(N + 1, 0.0);
  P[0] = 1.0;
  if (N >= 1) {
    P[1] = 0.5 * ((a + 2.0) * z + a);
    dP[1] = 0.5 * (a + 2.0);
  }
  for (int n = 2; n <= N; ++n) {
    const double c = 2.0 * n + a;
    const double d = 2.0 * n * (n + a) * (c - 2.0);
    const double e = (c - 1.0) * (c * (c - 2.0) * z + a * a);
    const double f = 2.0 * (n + a - 1.0) * (n - 1.0) * c;
    P[n] = (e * P[n - 1] - f * P[n - 2]) / d;
    dP[n] = (e * dP[n - 1] + (c - 1.0) * c * (c - 2.0) * P[n - 1] - f * dP[n - 2]) / d;
  }
}

// Orthonormal Dubiner basis on the reference triangle:
// psi_pq = Q_p(x, y) * P_q^{(2p+1,0)}(2y-1), Q_p = (1-y)^p P_p((2x+y-1)/(1-y)).
void eval_triangle_basis(const std::vector<std::array<int, 2>>& degrees, Point pt, std::vector<double>& v,
                         std::vector<Vec2>& g) {
  int maxd = 0;
  for (auto [i, j] : degrees) maxd = std::max(maxd, i + j);
  const double t = 2.0 * pt.x + pt.y - 1.0, s = 1.0 - pt.y;
  std::vector<double> Q(maxd + 1), Qx(maxd + 1), Qy(maxd + 1);
  Q[0] = 1.0;
  if (maxd >= 1) {
    Q[1] = t;
    Qx[1] = 2.0;
    Qy[1] = 1.0;
  }
  for (int p = 1; p < maxd; ++p) {
    const double a = (2.0 * p + 1.0) / (p + 1.0), b = static_cast<double>(p) / (p + 1.0);
    Q[p + 1] = a * t * Q[p] - b * s * s * Q[p - 1];
    Qx[p + 1] = a * (2.0 * Q[p] + t * Qx[p]) - b * s * s * Qx[p - 1];
    Qy[p + 1] = a * (Q[p] + t * Qy[p]) - b * (s * s * Qy[p - 1] - 2.0 * s * Q[p - 1]);
  }
  v.resize(degrees.size());
  g.resize(degrees.size());
  std::vector<double> J, dJ;
  for (std::size_t m = 0; m < degrees.size(); ++m) {
    const auto [p, q] = degrees[m];
    jacobi(q, 2.0 * p + 1.0, 2.0 * pt.y - 1.0, J, dJ);
    const double scale = std::sqrt(2.0 * (2 * p + 1) * (p + q + 1));
    v[m] = scale * Q[p] * J[q];
    g[m] = {scale * Qx[p] * J[q], scale * (Qy[p] * J[q] + 2.0 * Q[p] * dJ[q])};
  }
}

void eval_scalar_basis(CellShape shape, const std::vector<std::array<int, 2>>& degrees, Point p,
                       std::vector<double>& v, std::vector<Vec2>& g) {
  if (shape == CellShape::triangle)
    eval_triangle_basis(degrees, p, v, g);
  else
    eval_square_basis(degrees, p, v, g);
}

}  // namespace

void ReferenceElement::eval_prime(Point p, std::vector<double>& vals, std::vector<double>& grads) const {
  thread_local std::vector<double> sv;
  thread_local std::vector<Vec2> sg;
  eval_scalar_basis(shape_, prime_degrees_, p, sv, sg);
  const int ns = static_cast<int>(prime_degrees_.size());
  vals.assign(static_cast<std::size_t>(num_prime_) * value_size_, 0.0);
  grads.assign(vals.size() * 2, 0.0);
  if (value_size_ == 1) {
    for (int m = 0; m < ns; ++m) {
      vals[m] = sv[m];
      grads[2 * m] = sg[m].x;
      grads[2 * m + 1] = sg[m].y;
    }
    return;
  }
  auto set = [&](int m, int c, double v, double gx, double gy) {
    vals[m * 2 + c] = v;
    grads[(m * 2 + c) * 2] = gx;
    grads[(m * 2 + c) * 2 + 1] = gy;
  };
  for (int m = 0; m < ns; ++m) {
    set(m, 0, sv[m], sg[m].x, sg[m].y);
    set(ns + m, 1, sv[m], sg[m].x, sg[m].y);
  }
  if (rt_extra_degree_ >= 0) {
    // x * h with h = x^(d-j) y^j homogeneous of degree d
    const int d = rt_extra_degree_;
    for (int j = 0; j <= d; ++j) {
      const int a = d - j;
      const double h = std::pow(p.x, a) * std::pow(p.y, j);
      const double hx = a > 0 ? a * std::pow(p.x, a - 1) * std::pow(p.y, j) : 0.0;
      const double hy = j > 0 ? j * std::pow(p.x, a) * std::pow(p.y, j - 1) : 0.0;
      const int m = 2 * ns + j;
      set(m, 0, p.x * h, h + p.x * hx, p.x * hy);
      set(m, 1, p.y * h, p.y * hx, h + p.y * hy);
    }
  }
}

Tabulation ReferenceElement::tabulate(std::span<const Point> points) const {
  const int nd = num_dofs();
  const int vs = value_size_;
  Tabulation t(static_cast<int>(points.size()), nd, vs);
  std::vector<double> pv, pg;
  for (int p = 0; p < static_cast<int>(points.size()); ++p) {
    eval_prime(points[p], pv, pg);
    for (int m = 0; m < num_prime_; ++m) {
      const auto crow = coeffs_.row(m);
      for (int c = 0; c < vs; ++c) {
        const double v = pv[m * vs + c];
        const double gx = pg[(m * vs + c) * 2];
        const double gy = pg[(m * vs + c) * 2 + 1];
        if (v == 0.0 && gx == 0.0 && gy == 0.0) continue;
        for (int i = 0; i < nd; ++i) {
          const double a = crow[i];
          t.value(p, i, c) += a * v;
          t.grad(p, i, c, 0) += a * gx;
          t.grad(p, i, c, 1) += a * gy;
        }
      }
    }
  }
  return t;
}

std::vector<double> ReferenceElement::apply_functionals(const std::function<Vec2(Point)>& f) const {
  std::vector<double> out(functionals_.size(), 0.0);
  for (std::size_t i = 0; i < functionals_.size(); ++i) {
    const Functional& fn = functionals_[i];
    double s = 0.0;
    for (std::size_t q = 0; q < fn.points.size(); ++q) {
      const Vec2 v = f(fn.points[q]);
      s += value_size_ == 1 ? fn.weights[q].x * v.x : dot(fn.weights[q], v);
    }
    out[i] = s;
  }
  return out;
}

class ElementBuilder {
 public:
  static std::shared_ptr<ReferenceElement> build(Family family, CellShape shape, int k);

 private:
  static void add_point_dof(ReferenceElement& e, int dim, int entity, Point p);
  static void build_lagrange(ReferenceElement& e);
  static void build_hdiv(ReferenceElement& e);
  static void finalize(ReferenceElement& e);
};

void ElementBuilder::add_point_dof(ReferenceElement& e, int dim, int entity, Point p) {
  const int pos = static_cast<int>(e.entity_dofs_[dim][entity].size());
  e.entity_dofs_[dim][entity].push_back(e.num_dofs());
  e.attachments_.push_back({dim, entity, pos});
  e.functionals_.push_back({{p}, {Vec2{1.0, 0.0}}});
}

void ElementBuilder::build_lagrange(ReferenceElement& e) {
  const int k = e.order_;
  const CellShape shape = e.shape_;
  const auto verts = reference::vertices(shape);
  const int nv = static_cast<int>(verts.size());
  const double h = k > 0 ? 1.0 / k : 0.0;

  if (e.family_ == Family::discontinuous_lagrange) {
    if (k == 0) {
      add_point_dof(e, 2, 0, {1.0 / 3.0, 1.0 / 3.0});
    } else {
      for (int j = 0; j <= k; ++j)
        for (int i = 0; i + j <= k; ++i) add_point_dof(e, 2, 0, {i * h, j * h});
    }
    e.prime_degrees_ = triangle_degrees(k);
    return;
  }

  for (int v = 0; v < nv; ++v) add_point_dof(e, 0, v, verts[v]);
  for (int ed = 0; ed < nv; ++ed) {
    const auto [a, b] = reference::edge_vertices(shape, ed);
    for (int m = 1; m < k; ++m) add_point_dof(e, 1, ed, verts[a] + (m * h) * (verts[b] - verts[a]));
  }
  if (shape == CellShape::triangle) {
    for (int j = 1; j < k; ++j)
      for (int i = 1; i + j < k; ++i) add_point_dof(e, 2, 0, {i * h, j * h});
    e.prime_degrees_ = triangle_degrees(k);
  } else {
    for (int j = 1; j < k; ++j)
      for (int i = 1; i < k; ++i) add_point_dof(e, 2, 0, {i * h, j * h});
    e.prime_degrees_ = square_degrees(k);
  }
}

void ElementBuilder::build_hdiv(ReferenceElement& e) {
  const int k = e.order_;
  const bool bdm = e.family_ == Family::bdm;
  const CellShape shape = CellShape::triangle;
  const auto verts = reference::vertices(shape);

  // normal moments against Legendre polynomials on every edge
  const int edge_moments = bdm ? k + 1 : k;
  const LineRule line = gauss_legendre(k + 2);
  for (int ed = 0; ed < 3; ++ed) {
    const auto [a, b] = reference::edge_vertices(shape, ed);
    const Vec2 n = reference::edge_normal(shape, ed);
    const double len = reference::edge_length(shape, ed);
    for (int m = 0; m < edge_moments; ++m) {
      Functional f;
      for (std::size_t q = 0; q < line.points.size(); ++q) {
        const double s = line.points[q];
        f.points.push_back(verts[a] + s * (verts[b] - verts[a]));
        f.weights.push_back((line.weights[q] * len * shifted_legendre(m, s).first) * n);
      }
      e.entity_dofs_[1][ed].push_back(e.num_dofs());
      e.attachments_.push_back({1, ed, m});
      e.functionals_.push_back(std::move(f));
    }
  }

  // interior moments
  const QuadratureRule quad = make_quadrature(shape, 2 * k);
  auto add_interior = [&](const std::function<Vec2(Point)>& test) {
    Functional f;
    for (std::size_t q = 0; q < quad.size(); ++q) {
      f.points.push_back(quad.points[q]);
      f.weights.push_back(quad.weights[q] * test(quad.points[q]));
    }
    const int pos = static_cast<int>(e.entity_dofs_[2][0].size());
    e.entity_dofs_[2][0].push_back(e.num_dofs());
    e.attachments_.push_back({2, 0, pos});
    e.functionals_.push_back(std::move(f));
  };
  auto scalar_fn = [](std::vector<std::array<int, 2>> degs, int m) {
    return [degs = std::move(degs), m](Point p) {
      std::vector<double> v;
      std::vector<Vec2> g;
      eval_scalar_basis(CellShape::triangle, degs, p, v, g);
      return std::make_pair(v[m], g[m]);
    };
  };

  if (bdm) {
    // gradients of P_{k-1} without constants, and curls of bubble * P_{k-2}
    const auto grad_degs = triangle_degrees(k - 1);
    for (std::size_t m = 1; m < grad_degs.size(); ++m) {
      auto q = scalar_fn(grad_degs, static_cast<int>(m));
      add_interior([q](Point p) { return q(p).second; });
    }
    if (k >= 2) {
      const auto bubble_degs = triangle_degrees(k - 2);
      for (std::size_t m = 0; m < bubble_degs.size(); ++m) {
        auto q = scalar_fn(bubble_degs, static_cast<int>(m));
        add_interior([q](Point p) {
          const auto [qv, qg] = q(p);
          const double l0 = 1.0 - p.x - p.y;
          const double b = l0 * p.x * p.y;
          const Vec2 gb{p.y * (l0 - p.x), p.x * (l0 - p.y)};
          const Vec2 gpsi = qv * gb + b * qg;
          return Vec2{gpsi.y, -gpsi.x};
        });
      }
    }
    e.prime_degrees_ = triangle_degrees(k);
  } else {
    if (k >= 2) {
      const auto degs = triangle_degrees(k - 2);
      for (int c = 0; c < 2; ++c)
        for (std::size_t m = 0; m < degs.size(); ++m) {
          auto q = scalar_fn(degs, static_cast<int>(m));
          add_interior([q, c](Point p) {
            const double v = q(p).first;
            return c == 0 ? Vec2{v, 0.0} : Vec2{0.0, v};
          });
        }
    }
    e.prime_degrees_ = triangle_degrees(k - 1);
    e.rt_extra_degree_ = k - 1;
  }
}

void ElementBuilder::finalize(ReferenceElement& e) {
  const int ns = static_cast<int>(e.prime_degrees_.size());
  e.num_prime_ = e.value_size_ == 1 ? ns : 2 * ns + (e.rt_extra_degree_ >= 0 ? e.rt_extra_degree_ + 1 : 0);
  const int nd = e.num_dofs();
  if (e.num_prime_ != nd)
    throw Error("element construction: expansion size " + std::to_string(e.num_prime_) +
                " does not match DoF count " + std::to_string(nd));

  // V(i, m) = l_i(prime_m)
  e.coeffs_ = DenseMatrix::identity(nd);
  DenseMatrix V(nd, nd);
  std::vector<double> pv, pg;
  for (int i = 0; i < nd; ++i) {
    const Functional& f = e.functionals_[i];
    for (std::size_t q = 0; q < f.points.size(); ++q) {
      e.eval_prime(f.points[q], pv, pg);
      for (int m = 0; m < nd; ++m) {
        V(i, m) += e.value_size_ == 1 ? f.weights[q].x * pv[m]
                                      : f.weights[q].x * pv[2 * m] + f.weights[q].y * pv[2 * m + 1];
      }
    }
  }
  const LuFactorization lu = LuFactorization::factor(V);
  DenseMatrix C(nd, nd);
  std::vector<double> col(nd), x(nd), r(nd), dx(nd);
  for (int j = 0; j < nd; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    lu.solve(col, x);
    // one step of iterative refinement
    V.multiply(x, r);
    for (int i = 0; i < nd; ++i) r[i] = col[i] - r[i];
    lu.solve(r, dx);
    for (int i = 0; i < nd; ++i) C(i, j) = x[i] + dx[i];
  }
  e.coeffs_ = std::move(C);
}

std::shared_ptr<ReferenceElement> ElementBuilder::build(Family family, CellShape shape, int k) {
  auto e = std::make_shared<ReferenceElement>();
  e->family_ = family;
  e->shape_ = shape;
  e->order_ = k;
  const int nv = shape == CellShape::triangle ? 3 : 4;
  e->entity_dofs_[0].resize(nv);
  e->entity_dofs_[1].resize(nv);
  e->entity_dofs_[2].resize(1);
  if (family == Family::bdm || family == Family::rt) {
    e->value_size_ = 2;
    build_hdiv(*e);
  } else {
    build_lagrange(*e);
  }
  finalize(*e);
  return e;
}

std::shared_ptr<const ReferenceElement> make_element(Family family, CellShape shape, int k) {
  const std::string what =
      std::string(family_name(family)) + (shape == CellShape::triangle ? " on triangles" : " on quadrilaterals");
  switch (family) {
    case Family::lagrange:
      if (k < 1 || k > 8) throw Error("unsupported order " + std::to_string(k) + " for " + what);
      break;
    case Family::discontinuous_lagrange:
      if (shape != CellShape::triangle) throw Error("unsupported element: " + what);
      if (k < 0 || k > 8) throw Error("unsupported order " + std::to_string(k) + " for " + what);
      break;
    case Family::bdm:
    case Family::rt:
      if (shape != CellShape::triangle) throw Error("unsupported element: " + what);
      if (k < 1 || k > 4) throw Error("unsupported order " + std::to_string(k) + " for " + what);
      break;
  }
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const ReferenceElement>> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(static_cast<int>(family), static_cast<int>(shape), k);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, ElementBuilder::build(family, shape, k)).first;
  return it->second;
}

CellMap::CellMap(CellShape shape, std::span<const Point> vertices) : shape_(shape) {
  for (std::size_t i = 0; i < vertices.size() && i < 4; ++i) v_[i] = vertices[i];
}

CellMap CellMap::for_cell(const Mesh& mesh, int cell) {
  std::array<Point, 4> v{};
  const auto lv = mesh.topology.cell_local_vertices(cell);
  for (std::size_t i = 0; i < lv.size(); ++i) v[i] = mesh.geometry.vertex(lv[i]);
  return CellMap(mesh.shape(), std::span<const Point>(v.data(), lv.size()));
}

Point CellMap::map(Point r) const {
  if (shape_ == CellShape::triangle) return v_[0] + r.x * (v_[1] - v_[0]) + r.y * (v_[2] - v_[0]);
  return (1 - r.x) * (1 - r.y) * v_[0] + r.x * (1 - r.y) * v_[1] + (1 - r.x) * r.y * v_[2] + r.x * r.y * v_[3];
}

Mat2 CellMap::jacobian(Point r) const {
  Vec2 dxi, deta;
  if (shape_ == CellShape::triangle) {
    dxi = v_[1] - v_[0];
    deta = v_[2] - v_[0];
  } else {
    dxi = (1 - r.y) * (v_[1] - v_[0]) + r.y * (v_[3] - v_[2]);
    deta = (1 - r.x) * (v_[2] - v_[0]) + r.x * (v_[3] - v_[1]);
  }
  Mat2 J;
  J.m[0][0] = dxi.x;
  J.m[1][0] = dxi.y;
  J.m[0][1] = deta.x;
  J.m[1][1] = deta.y;
  return J;
}

Point CellMap::inverse(Point phys) const {
  if (shape_ == CellShape::triangle) return jacobian({}).inverse() * (phys - v_[0]);
  Point r{0.5, 0.5};
  for (int it = 0; it < 50; ++it) {
    const Vec2 res = map(r) - phys;
    const Vec2 d = jacobian(r).inverse() * res;
    r -= d;
    if (std::abs(d.x) + std::abs(d.y) < 1e-15) break;
  }
  return r;
}

Tabulation push_forward(const ReferenceElement& element, const CellMap& map, std::span<const Point> ref_points,
                        const Tabulation& ref) {
  const int np = ref.num_points(), nd = ref.num_dofs(), vs = ref.value_size();
  Tabulation out(np, nd, vs);
  const bool piola = !element.nodal();
  for (int p = 0; p < np; ++p) {
    const Mat2 J = map.jacobian(ref_points[p]);
    const double det = J.det();
    if (!(det > 0.0)) throw Error("push_forward: degenerate cell (det J <= 0)");
    const Mat2 Jinv = J.inverse();
    if (!piola) {
      for (int i = 0; i < nd; ++i)
        for (int c = 0; c < vs; ++c) {
          out.value(p, i, c) = ref.value(p, i, c);
          const Vec2 g{ref.grad(p, i, c, 0), ref.grad(p, i, c, 1)};
          // grad = J^{-T} ghat
          out.grad(p, i, c, 0) = Jinv.m[0][0] * g.x + Jinv.m[1][0] * g.y;
          out.grad(p, i, c, 1) = Jinv.m[0][1] * g.x + Jinv.m[1][1] * g.y;
        }
      continue;
    }
    for (int i = 0; i < nd; ++i) {
      const Vec2 v = J * Vec2{ref.value(p, i, 0), ref.value(p, i, 1)};
      out.value(p, i, 0) = v.x / det;
      out.value(p, i, 1) = v.y / det;
      Mat2 G;
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) G.m[c][d] = ref.grad(p, i, c, d);
      // affine maps only: grad v = J Ghat J^{-1} / det J
      const Mat2 PG = J * G * Jinv;
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out.grad(p, i, c, d) = PG.m[c][d] / det;
    }
  }
  return out;
}

}  // namespace stokes
