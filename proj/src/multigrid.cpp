#include "stokes_mg/multigrid.hpp"

#include <cmath>
#include <string>

#include "stokes_mg/kernels.hpp"

namespace stokes {

SparseMatrix build_prolongation(const FunctionSpace& coarse, const FunctionSpace& fine, const RefinementLink& link) {
  const ReferenceElement& fel = fine.element();
  const ReferenceElement& cel = coarse.element();
  if (fel.family() != cel.family() || fel.order() != cel.order() || fine.components() != coarse.components())
    throw Error("build_prolongation: spaces differ in element or components");
  const int nc = fine.components();
  const Mesh& fmesh = fine.mesh();
  std::vector<Triplet> t;
  std::vector<char> done(fine.size(), 0);
  for (int f = 0; f < fmesh.topology.num_cells(); ++f) {
    const int c = link.parent[f];
    const CellMap fmap = CellMap::for_cell(fmesh, f);
    const CellMap cmap = CellMap::for_cell(coarse.mesh(), c);
    const auto fdofs = fine.cell_dofs(f);
    const auto fsigns = fine.cell_signs(f);
    const auto cdofs = coarse.cell_dofs(c);
    const auto csigns = coarse.cell_signs(c);
    for (int i = 0; i < fel.num_dofs(); ++i) {
      if (done[fdofs[i * nc]]) continue;
      const Functional& fn = fel.functionals()[i];
      std::vector<Point> ref;
      for (const Point& p : fn.points) ref.push_back(cmap.inverse(fmap.map(p)));
      const Tabulation tab = push_forward(cel, cmap, ref, cel.tabulate(ref));
      for (int j = 0; j < cel.num_dofs(); ++j) {
        double v = 0.0;
        for (std::size_t q = 0; q < fn.points.size(); ++q) {
          const int qi = static_cast<int>(q);
          if (fel.nodal()) {
            v += fn.weights[q].x * tab.value(qi, j, 0);
          } else {
            const Mat2 J = fmap.jacobian(fn.points[q]);
            const Vec2 vhat = J.det() * (J.inverse() * Vec2{tab.value(qi, j, 0), tab.value(qi, j, 1)});
            v += dot(fn.weights[q], vhat);
          }
        }
        v *= fsigns[i * nc] * csigns[j * nc];
        if (std::abs(v) < 1e-14) continue;
        for (int comp = 0; comp < nc; ++comp) t.push_back({fdofs[i * nc + comp], cdofs[j * nc + comp], v});
      }
      for (int comp = 0; comp < nc; ++comp) done[fdofs[i * nc + comp]] = 1;
    }
  }
  return SparseMatrix::from_triplets(fine.size(), coarse.size(), std::move(t));
}

SparseMatrix build_mixed_prolongation(const MixedSpace& coarse, const MixedSpace& fine, const RefinementLink& link) {
  const SparseMatrix pv = build_prolongation(coarse.velocity, fine.velocity, link);
  const SparseMatrix pq = build_prolongation(coarse.pressure, fine.pressure, link);
  std::vector<Triplet> t;
  t.reserve(pv.nnz() + pq.nnz());
  for (int r = 0; r < pv.rows(); ++r) {
    const auto cols = pv.row_cols(r);
    const auto vals = pv.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) t.push_back({r, cols[k], vals[k]});
  }
  for (int r = 0; r < pq.rows(); ++r) {
    const auto cols = pq.row_cols(r);
    const auto vals = pq.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      t.push_back({fine.pressure_offset() + r, coarse.pressure_offset() + cols[k], vals[k]});
  }
  return SparseMatrix::from_triplets(fine.size(), coarse.size(), std::move(t));
}

std::vector<double> pressure_nullspace_vector(const MixedSpace& space) {
  std::vector<double> z(space.size(), 0.0);
  const auto one = interpolate(space.pressure, [](Point) { return Vec2{1.0, 0.0}; });
  std::copy(one.begin(), one.end(), z.begin() + space.pressure_offset());
  return z;
}

void chebyshev(const LinearOperator& a, const LinearOperator& precond, std::span<const double> b,
               std::span<double> x, int degree, double lower, double upper) {
  if (degree < 1) return;
  const std::size_t n = b.size();
  const double theta = 0.5 * (upper + lower), delta = 0.5 * (upper - lower);
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  std::vector<double> r(n), z(n), d(n), ad(n);
  a(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  precond(r, z);
  for (std::size_t i = 0; i < n; ++i) d[i] = z[i] / theta;
  for (int k = 1;; ++k) {
    kernels::axpy(1.0, d, x);
    if (k == degree) break;
    a(d, ad);
    kernels::axpy(-1.0, ad, r);
    precond(r, z);
    const double rho_next = 1.0 / (2.0 * sigma - rho);
    const double c1 = rho_next * rho, c2 = 2.0 * rho_next / delta;
    for (std::size_t i = 0; i < n; ++i) d[i] = c1 * d[i] + c2 * z[i];
    rho = rho_next;
  }
}

Hierarchy Hierarchy::build(Discretization d, int k, const MultigridOptions& opts) {
  if (opts.levels < 0) throw Error("levels must be nonnegative");
  if (opts.smoothing < 1) throw Error("relaxation degree must be at least 1");
  Hierarchy h;
  h.opts_ = opts;
  auto mesh = std::make_shared<const Mesh>(build_structured(discretization_shape(d), kBaseCellsPerSide));
  RefinementLink link;
  for (int l = 0; l <= opts.levels; ++l) {
    if (l > 0) {
      auto [fine, lk] = refine_uniform(*mesh);
      mesh = std::make_shared<const Mesh>(std::move(fine));
      link = std::move(lk);
    }
    MixedSpace space = build_mixed(d, mesh, k);
    BlockSystem system = assemble(space, opts.problem);
    Level lev{mesh, std::move(space), std::move(system), {}, {}, {}, {}};
    lev.nullspace = NullspaceProjector({pressure_nullspace_vector(lev.space)});
    if (l > 0) {
      lev.prolongation = build_mixed_prolongation(h.levels_.back().space, lev.space, link);
      lev.patches = build_patches(lev.space, lev.system.constrained, opts.weighting);
      lev.patches.factor(lev.system.matrix);
      const SparseMatrix& a = lev.system.matrix;
      const PatchSet& ps = lev.patches;
      const double lam = estimate_lambda_max(
          [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); },
          [&ps](std::span<const double> r, std::span<double> z) { ps.apply_additive(r, z); }, a.rows(),
          opts.lambda_steps, opts.seed + static_cast<std::uint64_t>(l), &lev.nullspace);
      if (!(lam > 0.0)) throw Error("nonpositive eigenvalue estimate on level " + std::to_string(l));
      lev.interval = {lam, 0.25 * lam, 1.1 * lam};
    }
    h.levels_.push_back(std::move(lev));
  }

  // coarse operator bordered by the normalized constant-pressure vector
  const Level& c = h.levels_.front();
  const int n = c.space.size();
  DenseMatrix bordered(n + 1, n + 1);
  const DenseMatrix a = c.system.matrix.to_dense();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) bordered(i, j) = a(i, j);
  const auto& z = c.nullspace.basis().front();
  for (int i = 0; i < n; ++i) bordered(i, n) = bordered(n, i) = z[i];
  h.coarse_lu_ = LuFactorization::factor(std::move(bordered));
  return h;
}

void Hierarchy::coarse_solve(std::span<const double> b, std::span<double> x) const {
  const int n = levels_.front().space.size();
  std::vector<double> rhs(b.begin(), b.end());
  rhs.push_back(0.0);
  coarse_lu_.solve_in_place(rhs);
  std::copy(rhs.begin(), rhs.begin() + n, x.begin());
}

void Hierarchy::relax(int l, std::span<const double> b, std::span<double> x, int steps) const {
  const Level& lev = levels_[l];
  const LinearOperator a = [&lev](std::span<const double> v, std::span<double> y) { lev.system.matrix.multiply(v, y); };
  const LinearOperator m = [&lev](std::span<const double> r, std::span<double> z) { lev.patches.apply_additive(r, z); };
  if (opts_.chebyshev == ChebyshevMode::degree) {
    chebyshev(a, m, b, x, steps, lev.interval.lower, lev.interval.upper);
  } else {
    for (int s = 0; s < steps; ++s) chebyshev(a, m, b, x, 1, lev.interval.lower, lev.interval.upper);
  }
}

void Hierarchy::cycle(int l, std::span<const double> b, std::span<double> x) const {
  if (l == 0) {
    coarse_solve(b, x);
    return;
  }
  const Level& lev = levels_[l];
  const Level& coarse = levels_[l - 1];
  const int n = lev.space.size(), nc = coarse.space.size();
  std::fill(x.begin(), x.end(), 0.0);
  relax(l, b, x, opts_.smoothing);
  for (int i = 0; i < n; ++i)
    if (lev.system.constrained[i]) x[i] = b[i];

  std::vector<double> r(n), rc(nc), xc(nc), e(n);
  lev.system.matrix.multiply(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  lev.prolongation.multiply_transpose(r, rc);
  for (int i = 0; i < nc; ++i)
    if (coarse.system.constrained[i]) rc[i] = 0.0;
  cycle(l - 1, rc, xc);
  lev.prolongation.multiply(xc, e);
  for (int i = 0; i < n; ++i)
    if (!lev.system.constrained[i]) x[i] += e[i];

  relax(l, b, x, opts_.smoothing);
  for (int i = 0; i < n; ++i)
    if (lev.system.constrained[i]) x[i] = b[i];
}

void Hierarchy::v_cycle(std::span<const double> b, std::span<double> z) const {
  cycle(num_levels() - 1, b, z);
}

}  // namespace stokes
