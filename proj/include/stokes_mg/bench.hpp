#pragma once

// Experiment driver: single solves, parameter sweeps and the stopping-tolerance
// study, all against the manufactured solution.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stokes_mg/multigrid.hpp"
#include "stokes_mg/quadrature.hpp"

namespace stokes {

struct RunSpec {
  Discretization discretization = Discretization::th_tri;
  int k = 2;
  int smoothing = 2;  // nu
  int levels = 1;
  double rtol = 1e-10;
  int max_it = 100;
  double alpha = 0.0;  // non-positive selects default_alpha(k)
  double viscosity = 1.0;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::inverse_multiplicity;
  ChebyshevMode chebyshev = ChebyshevMode::degree;

  MultigridOptions multigrid_options() const;
  double effective_alpha() const;
};

/// Throws Error when a field is out of range (k 2..8 Taylor-Hood, 1..4 H(div);
/// levels 0..5; nu 1..4).
void validate(const RunSpec& spec);

struct ErrorNorms {
  double velocity_h1_relative = 0.0;  // broken H1, relative to the exact field
  double pressure_l2 = 0.0;           // after removing the mean of both pressures
  double max_divergence = 0.0;        // over quadrature points
  double max_velocity = 0.0;          // max |u_h| over quadrature points
  double jump_seminorm = 0.0;         // (sum_e h_e^-1 ||[u_h]||_e^2)^(1/2), zero for Taylor-Hood
};

/// Quadrature of degree 2k+4 on every cell; x is a monolithic coefficient vector.
ErrorNorms error_norms(const MixedSpace& space, std::span<const double> x);

struct RunRecord {
  RunSpec spec;
  int n_dofs = 0;  // velocity
  int m_dofs = 0;  // pressure
  int iterations = 0;
  bool converged = false;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  ErrorNorms errors;
};

/// Non-convergence is reported in the record.
RunRecord run_case(const RunSpec& spec);

std::string_view weighting_name(Weighting w);
Weighting parse_weighting(std::string_view s);
std::string_view chebyshev_name(ChebyshevMode m);
ChebyshevMode parse_chebyshev(std::string_view s);

std::string csv_header();
std::string csv_row(const RunRecord& r);

/// Parses the flat key = value sweep file; k, nu and levels may be lists.
/// Expands the grid in the order k, nu, levels (levels fastest).
std::vector<RunSpec> parse_sweep_config(std::string_view text);

/// Runs the specs in order and writes the header plus one row per spec as each finishes.
std::vector<RunRecord> sweep(const std::vector<RunSpec>& specs, std::ostream& out);

/// Relative-residual thresholds of the stopping study: 1e-2 halved down to
/// 1e-15, in decreasing order.
std::vector<double> stopping_thresholds();

struct StoppingPoint {
  double rtol = 0.0;
  int iterations = 0;
  ErrorNorms errors;
};

struct StoppingResult {
  Discretization discretization = Discretization::bdm;
  int k = 0;
  int levels = 0;
  int n_dofs = 0;
  int m_dofs = 0;
  bool resolved = false;
  StoppingPoint plateau;                  // valid when resolved
  std::optional<StoppingPoint> reference;  // at rtol 1e-12, when reached
  std::vector<StoppingPoint> trace;        // every threshold reached, decreasing rtol
};

inline constexpr double kPlateauTolerance = 0.01;
inline constexpr double kReferenceRtol = 1e-12;

/// One FGMRES solve monitored at every threshold; the plateau is the largest
/// threshold whose velocity error is within 1% of the error at a quarter of it.
StoppingResult stopping_study(Discretization d, int k, int levels, const RunSpec& base = {});

std::string stopping_csv_header();
std::string stopping_csv_row(const StoppingResult& r);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace stokes
