#include "stokes_mg/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "stokes_mg/quadrature.hpp"

namespace stokes {

double default_alpha(int k) { return 10.0 * k * k; }

namespace manufactured {

Vec2 velocity(Point x) {
  return {std::sin(M_PI * x.x) * std::cos(M_PI * x.y), -std::cos(M_PI * x.x) * std::sin(M_PI * x.y)};
}

Mat2 velocity_gradient(Point x) {
  const double sx = std::sin(M_PI * x.x), cx = std::cos(M_PI * x.x);
  const double sy = std::sin(M_PI * x.y), cy = std::cos(M_PI * x.y);
  Mat2 g;
  g.m[0][0] = M_PI * cx * cy;
  g.m[0][1] = -M_PI * sx * sy;
  g.m[1][0] = M_PI * sx * sy;
  g.m[1][1] = -M_PI * cx * cy;
  return g;
}

double pressure(Point) { return 0.0; }

Vec2 forcing(Point x, double viscosity) { return (2.0 * M_PI * M_PI * viscosity) * velocity(x); }

}  // namespace manufactured

namespace {

// eps(phi_i) : eps(phi_j) for a vector tabulation at point p
double strain_product(const Tabulation& t, int p, int i, int j) {
  const double a00 = t.grad(p, i, 0, 0), a11 = t.grad(p, i, 1, 1);
  const double a01 = 0.5 * (t.grad(p, i, 0, 1) + t.grad(p, i, 1, 0));
  const double b00 = t.grad(p, j, 0, 0), b11 = t.grad(p, j, 1, 1);
  const double b01 = 0.5 * (t.grad(p, j, 0, 1) + t.grad(p, j, 1, 0));
  return a00 * b00 + a11 * b11 + 2.0 * a01 * b01;
}

double divergence(const Tabulation& t, int p, int i) { return t.grad(p, i, 0, 0) + t.grad(p, i, 1, 1); }

struct RawSystem {
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
};

// Cell terms shared by every pair: 2 nu (eps, eps), -(div v, q) mirrored, (f, v).
void assemble_cells(const MixedSpace& ms, const ProblemConfig& cfg, const VectorField& f, RawSystem& out) {
  const FunctionSpace& V = ms.velocity;
  const FunctionSpace& Q = ms.pressure;
  const Mesh& mesh = V.mesh();
  const int off = ms.pressure_offset();
  const QuadratureRule rule = make_quadrature(mesh.shape(), 2 * ms.k + 2);
  const Tabulation vref = V.element().tabulate(rule.points);
  const Tabulation qref = Q.element().tabulate(rule.points);
  const int nv = V.local_size(), nq = Q.local_size();
  std::vector<double> local(static_cast<std::size_t>(nv) * nv), blocal(static_cast<std::size_t>(nq) * nv);
  std::vector<double> w(rule.size());
  for (int c = 0; c < mesh.topology.num_cells(); ++c) {
    const CellMap map = CellMap::for_cell(mesh, c);
    const Tabulation tv = cell_basis(V, c, rule.points, vref);
    const Tabulation tq = cell_basis(Q, c, rule.points, qref);
    for (std::size_t q = 0; q < rule.size(); ++q) w[q] = rule.weights[q] * map.jacobian(rule.points[q]).det();
    std::fill(local.begin(), local.end(), 0.0);
    std::fill(blocal.begin(), blocal.end(), 0.0);
    const auto vd = V.cell_dofs(c);
    const auto qd = Q.cell_dofs(c);
    for (int p = 0; p < tv.num_points(); ++p) {
      const double wp = w[p];
      const Vec2 fx = f(map.map(rule.points[p]));
      for (int i = 0; i < nv; ++i) {
        out.rhs[vd[i]] += wp * (fx.x * tv.value(p, i, 0) + fx.y * tv.value(p, i, 1));
        for (int j = i; j < nv; ++j) local[i * nv + j] += wp * strain_product(tv, p, i, j);
        const double di = divergence(tv, p, i);
        for (int a = 0; a < nq; ++a) blocal[a * nv + i] -= wp * di * tq.value(p, a, 0);
      }
    }
    const double s = 2.0 * cfg.viscosity;
    for (int i = 0; i < nv; ++i)
      for (int j = i; j < nv; ++j) {
        const double v = s * local[i * nv + j];
        out.triplets.push_back({vd[i], vd[j], v});
        if (j != i) out.triplets.push_back({vd[j], vd[i], v});
      }
    for (int a = 0; a < nq; ++a)
      for (int i = 0; i < nv; ++i) {
        const double v = blocal[a * nv + i];
        out.triplets.push_back({off + qd[a], vd[i], v});
        out.triplets.push_back({vd[i], off + qd[a], v});
      }
  }
}

void assemble_facets(const MixedSpace& ms, const ProblemConfig& cfg, RawSystem& out) {
  const FunctionSpace& V = ms.velocity;
  const Mesh& mesh = V.mesh();
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : default_alpha(ms.k);
  const int nv = V.local_size();
  const int n2 = 2 * nv;
  std::vector<double> jt(n2), avg(n2), local(static_cast<std::size_t>(n2) * n2);
  std::vector<int> dofs(n2);
  for (int e = 0; e < mesh.topology.num_edges(); ++e) {
    if (mesh.topology.edge_cells(e).size() != 2) continue;
    const FacetTables ft = jump_average_tables(V, e, 2 * ms.k + 2);
    for (int s = 0; s < 2; ++s) {
      const auto d = V.cell_dofs(ft.cells[s]);
      std::copy(d.begin(), d.end(), dofs.begin() + s * nv);
    }
    const Vec2 n = ft.normal, t = ft.tangent;
    const double pen = 0.5 * alpha / ft.length;
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t p = 0; p < ft.points.size(); ++p) {
      const int q = static_cast<int>(p);
      for (int s = 0; s < 2; ++s) {
        const Tabulation& tb = ft.side[s];
        const double sign = s == 0 ? 1.0 : -1.0;
        for (int i = 0; i < nv; ++i) {
          // tangential jump and averaged t^T eps n
          jt[s * nv + i] = sign * (t.x * tb.value(q, i, 0) + t.y * tb.value(q, i, 1));
          double te = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              const double ta = a == 0 ? t.x : t.y, nb = b == 0 ? n.x : n.y;
              te += ta * 0.5 * (tb.grad(q, i, a, b) + tb.grad(q, i, b, a)) * nb;
            }
          avg[s * nv + i] = 0.5 * te;
        }
      }
      const double w = ft.weights[p];
      for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j)
          local[i * n2 + j] += w * (-avg[j] * jt[i] - jt[j] * avg[i] + pen * jt[i] * jt[j]);
    }
    const double s = 2.0 * cfg.viscosity;
    for (int i = 0; i < n2; ++i)
      for (int j = 0; j < n2; ++j) out.triplets.push_back({dofs[i], dofs[j], s * local[i * n2 + j]});
  }
}

BlockSystem finish(const MixedSpace& ms, RawSystem raw, StrongBc bc, bool apply_bc) {
  const int n = ms.size();
  BlockSystem sys;
  sys.constrained.assign(n, 0);
  SparseMatrix full = SparseMatrix::from_triplets(n, n, std::move(raw.triplets));
  if (!apply_bc) {
    sys.matrix = std::move(full);
    sys.rhs = std::move(raw.rhs);
    return sys;
  }
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < bc.dofs.size(); ++i) {
    sys.constrained[bc.dofs[i]] = 1;
    g[bc.dofs[i]] = bc.values[i];
  }
  std::vector<Triplet> kept;
  kept.reserve(full.nnz());
  for (int r = 0; r < n; ++r) {
    const auto cols = full.row_cols(r);
    const auto vals = full.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int c = cols[k];
      if (sys.constrained[r]) continue;
      if (sys.constrained[c]) {
        raw.rhs[r] -= vals[k] * g[c];
        continue;
      }
      kept.push_back({r, c, vals[k]});
    }
    if (sys.constrained[r]) {
      kept.push_back({r, r, 1.0});
      raw.rhs[r] = g[r];
    }
  }
  sys.matrix = SparseMatrix::from_triplets(n, n, std::move(kept));
  sys.rhs = std::move(raw.rhs);
  sys.bc = std::move(bc);
  return sys;
}

}  // namespace

FacetTables jump_average_tables(const FunctionSpace& velocity, int edge, int quadrature_degree) {
  const Mesh& mesh = velocity.mesh();
  const auto cells = mesh.topology.edge_cells(edge);
  if (cells.size() != 2) throw Error("jump_average_tables: edge " + std::to_string(edge) + " is on the boundary");
  const LineRule line = make_line_quadrature(quadrature_degree);
  FacetTables ft;
  ft.cells = {cells[0], cells[1]};
  ft.normal = mesh.geometry.edge_normal(edge);
  ft.tangent = mesh.geometry.edge_tangent(edge);
  ft.length = mesh.geometry.edge_length(edge);
  const auto [a, b] = mesh.topology.edge_vertices(edge);
  const Point pa = mesh.geometry.vertex(a), pb = mesh.geometry.vertex(b);
  for (std::size_t q = 0; q < line.points.size(); ++q) {
    ft.points.push_back(pa + line.points[q] * (pb - pa));
    ft.weights.push_back(line.weights[q] * ft.length);
  }
  for (int s = 0; s < 2; ++s) {
    const CellMap map = CellMap::for_cell(mesh, ft.cells[s]);
    std::vector<Point> ref;
    for (const Point& p : ft.points) ref.push_back(map.inverse(p));
    ft.side[s] = cell_basis(velocity, ft.cells[s], ref);
  }
  return ft;
}

BlockSystem assemble_taylor_hood(const MixedSpace& space, const ProblemConfig& cfg, const VectorField& f,
                                 const VectorField& g, bool apply_bc) {
  if (is_hdiv(space.discretization)) throw Error("assemble_taylor_hood needs a Taylor-Hood space");
  RawSystem raw{{}, std::vector<double>(space.size(), 0.0)};
  assemble_cells(space, cfg, f, raw);
  StrongBc bc = apply_bc ? strong_bc(space.velocity, g) : StrongBc{};
  return finish(space, std::move(raw), std::move(bc), apply_bc);
}

BlockSystem assemble_hdiv(const MixedSpace& space, const ProblemConfig& cfg, const VectorField& f, bool apply_bc) {
  if (!is_hdiv(space.discretization)) throw Error("assemble_hdiv needs a BDM or RT space");
  RawSystem raw{{}, std::vector<double>(space.size(), 0.0)};
  assemble_cells(space, cfg, f, raw);
  assemble_facets(space, cfg, raw);
  StrongBc bc = apply_bc ? strong_bc(space.velocity, [](Point) { return Vec2{0.0, 0.0}; }) : StrongBc{};
  return finish(space, std::move(raw), std::move(bc), apply_bc);
}

BlockSystem assemble(const MixedSpace& space, const ProblemConfig& cfg, bool apply_bc) {
  if (cfg.viscosity <= 0.0) throw Error("viscosity must be positive");
  const double nu = cfg.viscosity;
  const VectorField f = [nu](Point x) { return manufactured::forcing(x, nu); };
  if (is_hdiv(space.discretization)) return assemble_hdiv(space, cfg, f, apply_bc);
  return assemble_taylor_hood(space, cfg, f, manufactured::velocity, apply_bc);
}

}  // namespace stokes
