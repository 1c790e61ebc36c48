#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "stokes_mg/assembly.hpp"

using namespace stokes;

namespace {

std::shared_ptr<const Mesh> mesh_of(CellShape shape, int n) {
  return std::make_shared<const Mesh>(build_structured(shape, n));
}

Eigen::MatrixXd dense(const SparseMatrix& a) {
  const DenseMatrix d = a.to_dense();
  Eigen::MatrixXd e(d.rows(), d.cols());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j) e(i, j) = d(i, j);
  return e;
}

double quadratic_form(const SparseMatrix& a, const std::vector<double>& x) {
  const auto ax = a * x;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ax[i];
  return s;
}

// unconstrained velocity block as a dense matrix
Eigen::MatrixXd free_velocity_block(const MixedSpace& ms, const BlockSystem& sys) {
  std::vector<int> idx;
  for (int i = 0; i < ms.velocity_size(); ++i)
    if (!sys.constrained[i]) idx.push_back(i);
  const DenseMatrix d = extract_submatrix(sys.matrix, idx, idx);
  Eigen::MatrixXd e(d.rows(), d.cols());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j) e(i, j) = d(i, j);
  return e;
}

const std::vector<Discretization> kAll{Discretization::th_tri, Discretization::th_quad, Discretization::bdm,
                                       Discretization::rt};

}  // namespace

TEST(Manufactured, Identities) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-4;
  for (int t = 0; t < 20; ++t) {
    const Point x{u(rng), u(rng)};
    const Mat2 g = manufactured::velocity_gradient(x);
    EXPECT_NEAR(g.m[0][0] + g.m[1][1], 0.0, 1e-14);
    EXPECT_NEAR(0.5 * (g.m[0][1] + g.m[1][0]), 0.0, 1e-14);
    // gradient and -nu Laplacian by central differences
    const Vec2 ux = (1.0 / (2 * h)) * (manufactured::velocity(x + Vec2{h, 0}) - manufactured::velocity(x - Vec2{h, 0}));
    EXPECT_NEAR(ux.x, g.m[0][0], 1e-7);
    EXPECT_NEAR(ux.y, g.m[1][0], 1e-7);
    const Vec2 lap = (1.0 / (h * h)) * (manufactured::velocity(x + Vec2{h, 0}) + manufactured::velocity(x - Vec2{h, 0}) +
                                        manufactured::velocity(x + Vec2{0, h}) + manufactured::velocity(x - Vec2{0, h}) -
                                        4.0 * manufactured::velocity(x));
    const double nu = 1.7;
    const Vec2 f = manufactured::forcing(x, nu);
    EXPECT_NEAR(f.x, -nu * lap.x, 1e-5);
    EXPECT_NEAR(f.y, -nu * lap.y, 1e-5);
  }
  const Vec2 v = manufactured::velocity({0.5, 0.0});
  EXPECT_NEAR(v.x, 1.0, 1e-15);
  EXPECT_NEAR(v.y, 0.0, 1e-15);
  EXPECT_EQ(manufactured::pressure({0.3, 0.2}), 0.0);
}

class AssemblyAllCases : public ::testing::TestWithParam<Discretization> {};

TEST_P(AssemblyAllCases, BlockStructure) {
  const Discretization d = GetParam();
  const MixedSpace ms = build_mixed(d, mesh_of(discretization_shape(d), 3), 2);
  const BlockSystem sys = assemble(ms, {});
  const SparseMatrix& a = sys.matrix;
  EXPECT_LE(max_abs_difference(a, a.transpose()), 1e-10 * a.max_abs());
  const int off = ms.pressure_offset();
  for (int r = off; r < ms.size(); ++r)
    for (int c : a.row_cols(r)) EXPECT_LT(c, off);
  for (std::size_t i = 0; i < sys.bc.dofs.size(); ++i) {
    const int r = sys.bc.dofs[i];
    ASSERT_EQ(a.row_cols(r).size(), 1u);
    EXPECT_EQ(a.row_cols(r)[0], r);
    EXPECT_EQ(a.row_vals(r)[0], 1.0);
    EXPECT_EQ(sys.rhs[r], sys.bc.values[i]);
  }
  for (int r = 0; r < ms.size(); ++r)
    if (!sys.constrained[r])
      for (int c : a.row_cols(r)) EXPECT_FALSE(sys.constrained[c]);
}

TEST_P(AssemblyAllCases, ConstantPressureInKernel) {
  const Discretization d = GetParam();
  const MixedSpace ms = build_mixed(d, mesh_of(discretization_shape(d), 3), 3);
  const BlockSystem sys = assemble(ms, {});
  std::vector<double> x(ms.size(), 0.0);
  const std::vector<double> one = interpolate(ms.pressure, [](Point) { return Vec2{1.0, 0.0}; });
  std::copy(one.begin(), one.end(), x.begin() + ms.pressure_offset());
  const auto y = sys.matrix * x;
  for (double v : y) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST_P(AssemblyAllCases, PressureBlockMirrorsExactly) {
  const Discretization d = GetParam();
  const MixedSpace ms = build_mixed(d, mesh_of(discretization_shape(d), 2), 2);
  const BlockSystem sys = assemble(ms, {}, false);
  const int off = ms.pressure_offset();
  for (int r = off; r < ms.size(); ++r) {
    const auto cols = sys.matrix.row_cols(r);
    const auto vals = sys.matrix.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k) EXPECT_EQ(sys.matrix.at(cols[k], r), vals[k]);
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, AssemblyAllCases, ::testing::ValuesIn(kAll));

TEST(Assembly, TaylorHoodVelocityBlockDefinite) {
  for (auto d : {Discretization::th_tri, Discretization::th_quad}) {
    const MixedSpace ms = build_mixed(d, mesh_of(discretization_shape(d), 2), 2);
    const BlockSystem raw = assemble(ms, {}, false);
    const Eigen::MatrixXd full = dense(raw.matrix).topLeftCorner(ms.velocity_size(), ms.velocity_size());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(full).eigenvalues().minCoeff(), -1e-12);
    const BlockSystem sys = assemble(ms, {});
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(free_velocity_block(ms, sys)).eigenvalues().minCoeff(),
              1e-8);
  }
}

TEST(Assembly, RigidTranslationHasZeroEnergy) {
  const MixedSpace ms = build_mixed(Discretization::th_quad, mesh_of(CellShape::quadrilateral, 3), 3);
  const BlockSystem raw = assemble(ms, {}, false);
  std::vector<double> x(ms.size(), 0.0);
  const auto c = interpolate(ms.velocity, [](Point) { return Vec2{0.3, -1.2}; });
  std::copy(c.begin(), c.end(), x.begin());
  const auto y = raw.matrix * x;
  for (int i = 0; i < ms.velocity_size(); ++i) EXPECT_NEAR(y[i], 0.0, 1e-12);
}

TEST(Assembly, RhsSumsToIntegralOfConstantForcing) {
  const MixedSpace ms = build_mixed(Discretization::th_tri, mesh_of(CellShape::triangle, 4), 2);
  const BlockSystem raw = assemble_taylor_hood(ms, {}, [](Point) { return Vec2{1.0, 2.0}; },
                                               [](Point) { return Vec2{}; }, false);
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < ms.velocity_size(); i += 2) sx += raw.rhs[i], sy += raw.rhs[i + 1];
  EXPECT_NEAR(sx, 1.0, 1e-12);
  EXPECT_NEAR(sy, 2.0, 1e-12);
}

TEST(Assembly, PenaltyTermsVanishOnContinuousFields) {
  // w = (x^2, xy) lies in BDM_2 and is continuous, so a_h(w, w) = 2 nu int eps(w):eps(w) = 11/3 nu
  const double nu = 1.3;
  const MixedSpace ms = build_mixed(Discretization::bdm, mesh_of(CellShape::triangle, 5), 2);
  const BlockSystem raw = assemble(ms, {.viscosity = nu}, false);
  std::vector<double> x(ms.size(), 0.0);
  const auto w = interpolate(ms.velocity, [](Point p) { return Vec2{p.x * p.x, p.x * p.y}; });
  std::copy(w.begin(), w.end(), x.begin());
  EXPECT_NEAR(quadratic_form(raw.matrix, x), 11.0 / 3.0 * nu, 1e-11);

  // the manufactured field is only approximately continuous in BDM_2
  const auto u = interpolate(ms.velocity, manufactured::velocity);
  std::copy(u.begin(), u.end(), x.begin());
  // 2 nu int eps(u):eps(u) = 2 nu * pi^2 / 2 on the unit square
  EXPECT_NEAR(quadratic_form(raw.matrix, x), nu * M_PI * M_PI, 0.05 * nu * M_PI * M_PI);
}

TEST(Assembly, SmallPenaltyLosesCoercivity) {
  const MixedSpace ms = build_mixed(Discretization::bdm, mesh_of(CellShape::triangle, 2), 1);
  const auto min_eig = [&](double alpha) {
    const BlockSystem sys = assemble(ms, {.viscosity = 1.0, .alpha = alpha});
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(free_velocity_block(ms, sys)).eigenvalues().minCoeff();
  };
  EXPECT_LT(min_eig(0.01), 0.0);
  EXPECT_GT(min_eig(default_alpha(1)), 0.0);
}

TEST(Assembly, ViscosityScalesVelocityBlock) {
  const MixedSpace ms = build_mixed(Discretization::rt, mesh_of(CellShape::triangle, 2), 2);
  const BlockSystem a1 = assemble(ms, {.viscosity = 1.0}, false);
  const BlockSystem a3 = assemble(ms, {.viscosity = 3.0}, false);
  for (int r = 0; r < ms.velocity_size(); ++r)
    for (int c : a1.matrix.row_cols(r))
      if (c < ms.velocity_size()) EXPECT_NEAR(a3.matrix.at(r, c), 3.0 * a1.matrix.at(r, c), 1e-12);
}

TEST(JumpAverage, ContinuousFieldHasNoJump) {
  const MixedSpace ms = build_mixed(Discretization::th_tri, mesh_of(CellShape::triangle, 3), 2);
  const auto coef = interpolate(ms.velocity, manufactured::velocity);
  for (int e = 0; e < ms.velocity.mesh().topology.num_edges(); ++e) {
    if (ms.velocity.mesh().topology.on_boundary({1, e})) {
      EXPECT_THROW(jump_average_tables(ms.velocity, e, 4), Error);
      continue;
    }
    const FacetTables ft = jump_average_tables(ms.velocity, e, 4);
    for (std::size_t q = 0; q < ft.points.size(); ++q) {
      Vec2 v[2];
      for (int s = 0; s < 2; ++s) {
        const auto dofs = ms.velocity.cell_dofs(ft.cells[s]);
        for (int i = 0; i < ft.side[s].num_dofs(); ++i) {
          v[s].x += coef[dofs[i]] * ft.side[s].value(int(q), i, 0);
          v[s].y += coef[dofs[i]] * ft.side[s].value(int(q), i, 1);
        }
      }
      // jump v1 (x) n - v2 (x) n vanishes; the average equals the trace
      EXPECT_NEAR(norm(v[0] - v[1]), 0.0, 1e-12);
      const Vec2 avg = 0.5 * (v[0] + v[1]);
      EXPECT_NEAR(norm(avg - v[0]), 0.0, 1e-12);
    }
  }
}
