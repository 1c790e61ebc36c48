// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// when any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "stokes_mg/bench.hpp"
#include "stokes_mg/quadrature.hpp"

using namespace stokes;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " exception: " << e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s:%s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str());
  std::fflush(stdout);
}

RunSpec spec(Discretization d, int k, int levels, int nu = 2, double rtol = 1e-10) {
  RunSpec s;
  s.discretization = d;
  s.k = k;
  s.levels = levels;
  s.smoothing = nu;
  s.rtol = rtol;
  if (d == Discretization::rt) s.max_it = 200;
  return s;
}

const char* name(Discretization d) { return discretization_name(d).data(); }

double median(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// max over level pairs up to `levels` of |P^T A_f P - A_c|_max / |A_c|_max
std::pair<double, double> galerkin_defect_range(Discretization d, int k, int levels) {
  auto coarse = std::make_shared<const Mesh>(build_structured(discretization_shape(d), kBaseCellsPerSide));
  double lo = INFINITY, hi = 0.0;
  for (int l = 0; l < levels; ++l) {
    auto [fm, link] = refine_uniform(*coarse);
    auto fine = std::make_shared<const Mesh>(std::move(fm));
    const MixedSpace cs = build_mixed(d, coarse, k), fs = build_mixed(d, fine, k);
    const SparseMatrix ac = assemble(cs, {}, false).matrix, af = assemble(fs, {}, false).matrix;
    const SparseMatrix g = triple_product(build_mixed_prolongation(cs, fs, link), af);
    const double rel = max_abs_difference(g, ac) / ac.max_abs();
    lo = std::min(lo, rel);
    hi = std::max(hi, rel);
    coarse = fine;
  }
  return {lo, hi};
}

void criterion_galerkin(Outcome& o) {
  for (Discretization d : {Discretization::th_tri, Discretization::th_quad})
    for (int k : {2, 3})
      for (int l : {1, 2}) {
        const double rel = galerkin_defect_range(d, k, l).second;
        if (!(rel <= 1e-10)) o.pass = false;
        o.detail << ' ' << name(d) << "/k" << k << "/l" << l << '=' << rel;
      }
  for (int k : {1, 2}) {
    const double rel = galerkin_defect_range(Discretization::bdm, k, 2).first;
    if (!(rel >= 1e-3)) o.pass = false;
    o.detail << " bdm/k" << k << '=' << rel;
  }
}

void criterion_divergence(Outcome& o) {
  double worst = 0.0;
  for (Discretization d : {Discretization::bdm, Discretization::rt})
    for (int k : {1, 2, 3})
      for (int l : {1, 2}) {
        const RunRecord r = run_case(spec(d, k, l));
        const double rel = r.errors.max_divergence / r.errors.max_velocity;
        worst = std::max(worst, rel);
        if (!r.converged || !(rel <= 1e-8)) {
          o.pass = false;
          o.detail << ' ' << name(d) << "/k" << k << "/l" << l << " div/|u|=" << rel << (r.converged ? "" : " unconverged");
        }
      }
  o.detail << " worst hdiv div/|u|=" << worst;
  const RunRecord th = run_case(spec(Discretization::th_tri, 2, 1));
  const double rel = th.errors.max_divergence / th.errors.max_velocity;
  if (!(rel > 1e-3)) o.pass = false;
  o.detail << " th-tri control div/|u|=" << rel;
}

void criterion_orders(Outcome& o) {
  const std::pair<Discretization, int> cases[] = {{Discretization::th_tri, 2},
                                                  {Discretization::th_quad, 2},
                                                  {Discretization::th_quad, 3},
                                                  {Discretization::bdm, 1},
                                                  {Discretization::bdm, 2}};
  for (auto [d, k] : cases) {
    std::vector<double> h, e;
    for (int l = 0; l <= 2; ++l) {
      const RunRecord r = run_case(spec(d, k, l));
      if (!r.converged) o.pass = false;
      h.push_back(1.0 / (kBaseCellsPerSide << l));
      e.push_back(r.errors.velocity_h1_relative);
    }
    const double slope = log_log_slope(h, e);
    if (!(slope >= k - 0.25)) o.pass = false;
    o.detail << ' ' << name(d) << "/k" << k << " slope=" << slope;
  }
}

void criterion_h_robust(Outcome& o) {
  for (auto [d, k] : {std::pair{Discretization::bdm, 2}, std::pair{Discretization::th_quad, 3}}) {
    std::vector<int> its;
    for (int l : {1, 2, 3}) {
      const RunRecord r = run_case(spec(d, k, l, 2));
      its.push_back(r.iterations);
      if (!r.converged || r.iterations > 60) o.pass = false;
    }
    const double ratio = static_cast<double>(its[2]) / its[0];
    if (!(ratio <= 1.4)) o.pass = false;
    o.detail << ' ' << name(d) << "/k" << k << " its=" << its[0] << '/' << its[1] << '/' << its[2] << " ratio=" << ratio;
  }
}

void criterion_p_robust(Outcome& o) {
  const struct {
    Discretization d;
    int nu;
    std::vector<int> ks;
  } groups[] = {{Discretization::th_quad, 1, {2, 3, 4}}, {Discretization::bdm, 2, {1, 2, 3}}};
  for (const auto& g : groups) {
    std::vector<int> its;
    for (int k : g.ks) {
      const RunRecord r = run_case(spec(g.d, k, 2, g.nu));
      its.push_back(r.iterations);
      if (!r.converged || r.iterations > 60) o.pass = false;
    }
    const double med = median(its);
    for (int n : its)
      if (std::abs(n - med) > 0.5 * med) o.pass = false;
    o.detail << ' ' << name(g.d) << " its=" << its[0] << '/' << its[1] << '/' << its[2] << " median=" << med;
  }
}

void criterion_tri_vs_quad(Outcome& o) {
  const RunRecord t = run_case(spec(Discretization::th_tri, 4, 2, 1));
  const RunRecord q = run_case(spec(Discretization::th_quad, 4, 2, 1));
  if (!t.converged || !q.converged || t.iterations < q.iterations) o.pass = false;
  o.detail << " th-tri=" << t.iterations << " th-quad=" << q.iterations;
}

void criterion_stopping(Outcome& o) {
  std::vector<double> h, tol;
  for (int l : {1, 2, 3}) {
    const StoppingResult r = stopping_study(Discretization::bdm, 2, l);
    if (!r.resolved || !r.reference) {
      o.pass = false;
      o.detail << " l" << l << " unresolved";
      continue;
    }
    const double ref = r.reference->errors.velocity_h1_relative;
    const double dev = std::abs(r.plateau.errors.velocity_h1_relative - ref) / ref;
    if (!(dev <= 0.05)) o.pass = false;
    h.push_back(1.0 / (kBaseCellsPerSide << l));
    tol.push_back(r.plateau.rtol);
    o.detail << " l" << l << " rtol=" << r.plateau.rtol << " dev=" << dev;
  }
  if (h.size() == 3) {
    const double slope = log_log_slope(h, tol);
    if (!(std::abs(slope - 3.0) <= 0.5)) o.pass = false;
    o.detail << " slope=" << slope;
  } else {
    o.pass = false;
  }
}

void criterion_direct(Outcome& o) {
  for (auto [d, k] : {std::pair{Discretization::th_tri, 2}, std::pair{Discretization::bdm, 1}}) {
    MultigridOptions opts;
    opts.levels = 1;
    const Hierarchy hier = Hierarchy::build(d, k, opts);
    const Level& f = hier.finest();
    const int n = f.space.size(), off = f.space.pressure_offset();
    const SparseMatrix& a = f.system.matrix;
    std::vector<double> x(n, 0.0);
    const KrylovReport rep =
        fgmres([&a](std::span<const double> v, std::span<double> y) { a.multiply(v, y); },
               [&hier](std::span<const double> r, std::span<double> z) { hier.v_cycle(r, z); }, f.system.rhs, x,
               {.rtol = 1e-12, .max_it = 200, .nullspace = &f.nullspace});

    // dense solve of the system bordered by the constant-pressure vector
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    const DenseMatrix ad = a.to_dense();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = ad(i, j);
    for (int i = off; i < n; ++i) m(i, n) = m(n, i) = 1.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) rhs[i] = f.system.rhs[i];
    const Eigen::VectorXd ref = m.partialPivLu().solve(rhs);

    auto mean_free = [&](auto&& v) {
      std::vector<double> out(n);
      double mean = 0.0;
      for (int i = off; i < n; ++i) mean += v[i];
      mean /= (n - off);
      for (int i = 0; i < n; ++i) out[i] = i < off ? v[i] : v[i] - mean;
      return out;
    };
    const auto xs = mean_free(x), xr = mean_free(ref);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += (xs[i] - xr[i]) * (xs[i] - xr[i]);
      den += xr[i] * xr[i];
    }
    const double rel = std::sqrt(num / den);
    if (!rep.converged || !(rel <= 1e-8)) o.pass = false;
    o.detail << ' ' << name(d) << "/k" << k << " its=" << rep.iterations << " rel=" << rel;
  }
}

// unit-level properties

bool nodality_ok(double& worst) {
  auto check = [&](Family fam, CellShape s, int k) {
    const auto el = make_element(fam, s, k);
    for (int i = 0; i < el->num_dofs(); ++i) {
      const auto dual = el->apply_functionals([&](Point p) {
        const Tabulation t = el->tabulate(std::span(&p, 1));
        return Vec2{t.value(0, i, 0), el->value_size() == 2 ? t.value(0, i, 1) : 0.0};
      });
      for (int j = 0; j < el->num_dofs(); ++j) worst = std::max(worst, std::abs(dual[j] - (i == j ? 1.0 : 0.0)));
    }
  };
  for (int k = 1; k <= 8; ++k) {
    check(Family::lagrange, CellShape::triangle, k);
    check(Family::lagrange, CellShape::quadrilateral, k);
    check(Family::discontinuous_lagrange, CellShape::triangle, k);
  }
  for (int k = 1; k <= 4; ++k) {
    check(Family::bdm, CellShape::triangle, k);
    check(Family::rt, CellShape::triangle, k);
  }
  return worst <= 1e-12;
}

bool quadrature_ok(double& worst) {
  auto factorial = [](int n) { return std::tgamma(n + 1.0); };
  for (int deg = 1; deg <= 20; ++deg) {
    const QuadratureRule tri = make_quadrature(CellShape::triangle, deg);
    const QuadratureRule quad = make_quadrature(CellShape::quadrilateral, deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double st = 0.0, sq = 0.0;
        for (std::size_t q = 0; q < tri.size(); ++q)
          st += tri.weights[q] * std::pow(tri.points[q].x, a) * std::pow(tri.points[q].y, b);
        for (std::size_t q = 0; q < quad.size(); ++q)
          sq += quad.weights[q] * std::pow(quad.points[q].x, a) * std::pow(quad.points[q].y, b);
        const double et = factorial(a) * factorial(b) / factorial(a + b + 2);
        const double eq = 1.0 / ((a + 1.0) * (b + 1.0));
        worst = std::max({worst, std::abs(st - et) / et, std::abs(sq - eq) / eq});
      }
  }
  return worst <= 1e-12;
}

bool star_closure_ok() {
  for (CellShape s : {CellShape::triangle, CellShape::quadrilateral}) {
    const Mesh m = build_structured(s, 4);
    const MeshTopology& t = m.topology;
    const int per_cell = s == CellShape::triangle ? 7 : 9;
    for (int c = 0; c < t.count(2); ++c) {
      const EntityRef cell[] = {{2, c}};
      if (static_cast<int>(t.closure(cell).size()) != per_cell) return false;
      if (t.star({2, c}).size() != 1) return false;
    }
    for (int v = 0; v < t.count(0); ++v) {
      const auto st = t.star({0, v});
      const auto cl = t.closure(st);
      const auto cells = std::count_if(st.begin(), st.end(), [](EntityRef e) { return e.dim == 2; });
      const auto edges = std::count_if(st.begin(), st.end(), [](EntityRef e) { return e.dim == 1; });
      if (cells != static_cast<long>(t.vertex_cells(v).size()) || edges != static_cast<long>(t.vertex_edges(v).size()))
        return false;
      if (std::find(cl.begin(), cl.end(), EntityRef{0, v}) == cl.end()) return false;
      // closure is idempotent
      if (t.closure(cl) != cl) return false;
    }
  }
  return true;
}

bool patches_ok() {
  const std::pair<Discretization, int> cases[] = {
      {Discretization::th_tri, 3}, {Discretization::th_quad, 3}, {Discretization::bdm, 2}, {Discretization::rt, 2}};
  for (auto [d, k] : cases) {
    const MixedSpace ms =
        build_mixed(d, std::make_shared<const Mesh>(build_structured(discretization_shape(d), 4)), k);
    const BlockSystem sys = assemble(ms, {});
    const PatchSet ps = build_patches(ms, sys.constrained);
    std::vector<int> count(ms.size(), 0);
    for (const Patch& p : ps.patches())
      for (int dof : p.dofs) ++count[dof];
    for (int i = 0; i < ms.size(); ++i) {
      if (sys.constrained[i]) {
        if (count[i] != 0) return false;
      } else if (i >= ms.pressure_offset() ? count[i] != 1 : count[i] < 1) {
        return false;
      }
    }
  }
  return true;
}

bool two_patch_ok(double& worst) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd g(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = u(rng);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(6, 6);
  k.topLeftCorner(4, 4) = g * g.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) k(4 + i, j) = k(j, 4 + i) = u(rng);
  DenseMatrix kd(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) kd(i, j) = k(i, j);
  const std::vector<std::vector<int>> sets{{0, 1, 2, 4}, {1, 2, 3, 5}};
  std::vector<Patch> patches(2);
  for (int p = 0; p < 2; ++p) {
    patches[p].dofs = sets[p];
    patches[p].num_velocity = 3;
  }
  PatchSet ps(std::move(patches), 6, 4, std::vector<char>(6, 0), Weighting::inverse_multiplicity);
  ps.factor(SparseMatrix::from_dense(kd));
  std::vector<double> r(6), z(6);
  for (double& x : r) x = u(rng);
  ps.apply_additive(r, z);

  Eigen::VectorXd ref = Eigen::VectorXd::Zero(6);
  const Eigen::Map<const Eigen::VectorXd> rv(r.data(), 6);
  const Eigen::VectorXd w = (Eigen::VectorXd(6) << 1.0, 0.5, 0.5, 1.0, 1.0, 1.0).finished();
  for (const auto& idx : sets) {
    Eigen::MatrixXd rm = Eigen::MatrixXd::Zero(4, 6);
    for (int i = 0; i < 4; ++i) rm(i, idx[i]) = 1.0;
    ref += w.asDiagonal() * (rm.transpose() * (rm * k * rm.transpose()).lu().solve(rm * rv));
  }
  for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(z[i] - ref[i]));
  return worst <= 1e-13;
}

bool chebyshev_ok(double& worst) {
  const int n = 8;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 + i});
    if (i + 1 < n) t.push_back({i, i + 1, 0.3});
  }
  const SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  std::vector<double> b(n), x(n), x0, ax(n);
  for (int i = 0; i < n; ++i) {
    b[i] = std::sin(i + 1.0);
    x[i] = std::cos(2.0 * i);
  }
  x0 = x;
  const double lo = 0.7, hi = 4.1;
  chebyshev([&a](std::span<const double> v, std::span<double> y) { a.multiply(v, y); },
            [](std::span<const double> r, std::span<double> z) {
              for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / (2.0 + i);
            },
            b, x, 1, lo, hi);
  a.multiply(x0, ax);
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(x[i] - (x0[i] + 2.0 / (lo + hi) * (b[i] - ax[i]) / (2.0 + i))));
  return worst <= 1e-14;
}

bool fgmres_ok(int& its) {
  const int n = 30;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.push_back({i, j, (i == j ? 3.0 : 0.0) + 0.3 * u(rng)});
  const SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  std::vector<double> b(n), x(n, 0.0);
  for (double& v : b) v = u(rng);
  const KrylovReport rep = fgmres([&a](std::span<const double> v, std::span<double> y) { a.multiply(v, y); },
                                  [](std::span<const double> r, std::span<double> z) { std::copy(r.begin(), r.end(), z.begin()); },
                                  b, x, {.rtol = 1e-12, .max_it = n});
  its = rep.iterations;
  for (std::size_t i = 1; i < rep.history.size(); ++i)
    if (rep.history[i] > rep.history[i - 1] * (1.0 + 1e-12)) return false;
  return rep.converged && rep.iterations <= n;
}

void criterion_units(Outcome& o) {
  double nod = 0.0, quad = 0.0, vanka = 0.0, cheb = 0.0;
  int its = 0;
  const bool checks[] = {nodality_ok(nod), quadrature_ok(quad), star_closure_ok(), patches_ok(),
                         two_patch_ok(vanka), chebyshev_ok(cheb), fgmres_ok(its)};
  const char* names[] = {"nodality", "quadrature", "star/closure", "patch cover", "two-patch", "chebyshev", "fgmres"};
  for (int i = 0; i < 7; ++i) {
    if (!checks[i]) o.pass = false;
    o.detail << ' ' << names[i] << (checks[i] ? "=ok" : "=bad");
  }
  o.detail << " (nodality " << nod << ", quadrature " << quad << ", fgmres its " << its << ')';
}

}  // namespace

int main() {
  report(1, "Galerkin identity of transfers", criterion_galerkin);
  report(2, "pointwise divergence", criterion_divergence);
  report(3, "velocity convergence orders", criterion_orders);
  report(4, "h-robustness", criterion_h_robust);
  report(5, "p-robustness", criterion_p_robust);
  report(6, "triangles vs quadrilaterals at k=4", criterion_tri_vs_quad);
  report(7, "stopping tolerance scaling", criterion_stopping);
  report(8, "agreement with dense direct solve", criterion_direct);
  report(9, "unit-level properties", criterion_units);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
