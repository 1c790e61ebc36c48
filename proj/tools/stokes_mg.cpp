// stokes-mg: run single solves, parameter sweeps and the stopping-tolerance study.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stokes_mg/bench.hpp"

using namespace stokes;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monolithic multigrid for higher-order Stokes discretizations"};
  app.require_subcommand(1);

  RunSpec spec;
  std::string case_name, weighting = "invmult", cheby = "degree", out_path;
  auto* run = app.add_subcommand("run", "solve one configuration and write a CSV row");
  run->add_option("--case", case_name, "th-tri, th-quad, bdm or rt")->required()
      ->check(CLI::IsMember({"th-tri", "th-quad", "bdm", "rt"}));
  run->add_option("--k", spec.k, "velocity order")->required();
  run->add_option("--nu", spec.smoothing, "relaxation degree per stage")->required();
  run->add_option("--levels", spec.levels, "refinements above the 5x5 base mesh")->required();
  run->add_option("--rtol", spec.rtol, "relative residual tolerance")->required();
  run->add_option("--max-it", spec.max_it, "FGMRES iteration cap")->required();
  run->add_option("--alpha", spec.alpha, "interior penalty (default 10 k^2)");
  run->add_option("--viscosity", spec.viscosity, "kinematic viscosity");
  run->add_option("--seed", spec.seed, "eigenvalue-estimate seed");
  run->add_option("--weighting", weighting, "additive weights")->check(CLI::IsMember({"invmult", "unit"}));
  run->add_option("--cheby", cheby, "Chebyshev mode")->check(CLI::IsMember({"degree", "repeat"}));
  run->add_option("--out", out_path, "CSV file")->required();

  std::string config_path, sweep_out;
  auto* sw = app.add_subcommand("sweep", "run the grid described by a config file");
  sw->add_option("--config", config_path, "flat key = value file")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", sweep_out, "CSV file")->required();

  std::string stop_case, stop_out;
  int stop_k = 2, max_levels = 3;
  RunSpec stop_base;
  auto* st = app.add_subcommand("stopping", "find the loosest tolerance that reaches the discretization error");
  st->add_option("--case", stop_case, "th-quad or bdm")->required()->check(CLI::IsMember({"th-quad", "bdm"}));
  st->add_option("--k", stop_k, "velocity order")->required();
  st->add_option("--max-levels", max_levels, "study levels 1..max")->required();
  st->add_option("--nu", stop_base.smoothing, "relaxation degree per stage");
  st->add_option("--seed", stop_base.seed, "eigenvalue-estimate seed");
  st->add_option("--out", stop_out, "CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      spec.discretization = parse_discretization(case_name);
      spec.weighting = parse_weighting(weighting);
      spec.chebyshev = parse_chebyshev(cheby);
      validate(spec);
      const RunRecord r = run_case(spec);
      auto out = open_out(out_path);
      out << csv_header() << '\n' << csv_row(r) << '\n';
      std::cout << csv_row(r) << '\n';
      return r.converged ? 0 : 2;
    }
    if (*sw) {
      const auto specs = parse_sweep_config(read_file(config_path));
      auto out = open_out(sweep_out);
      const auto records = sweep(specs, out);
      int failed = 0;
      for (const auto& r : records) failed += r.converged ? 0 : 1;
      std::cout << records.size() << " runs, " << failed << " not converged\n";
      return 0;
    }
    if (*st) {
      const Discretization d = parse_discretization(stop_case);
      if (max_levels < 1) throw Error("--max-levels must be at least 1");
      auto out = open_out(stop_out);
      out << stopping_csv_header() << '\n';
      std::vector<double> hs, tols;
      for (int l = 1; l <= max_levels; ++l) {
        const StoppingResult r = stopping_study(d, stop_k, l, stop_base);
        out << stopping_csv_row(r) << '\n' << std::flush;
        std::cout << stopping_csv_row(r) << '\n';
        if (r.resolved) {
          hs.push_back(1.0 / (kBaseCellsPerSide << l));
          tols.push_back(r.plateau.rtol);
        }
      }
      if (hs.size() >= 2) std::cout << "required rtol ~ h^" << log_log_slope(hs, tols) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "stokes-mg: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
