#include "stokes_mg/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace stokes {

MultigridOptions RunSpec::multigrid_options() const {
  MultigridOptions o;
  o.levels = levels;
  o.smoothing = smoothing;
  o.problem.viscosity = viscosity;
  o.problem.alpha = alpha;
  o.weighting = weighting;
  o.chebyshev = chebyshev;
  o.seed = seed;
  return o;
}

double RunSpec::effective_alpha() const { return alpha > 0.0 ? alpha : default_alpha(k); }

void validate(const RunSpec& s) {
  const bool hdiv = is_hdiv(s.discretization);
  const int kmin = hdiv ? 1 : 2, kmax = hdiv ? 4 : 8;
  if (s.k < kmin || s.k > kmax)
    throw Error("k = " + std::to_string(s.k) + " outside " + std::to_string(kmin) + ".." + std::to_string(kmax) + " for " +
                std::string(discretization_name(s.discretization)));
  if (s.levels < 0 || s.levels > 5) throw Error("levels must lie in 0..5");
  if (s.smoothing < 1 || s.smoothing > 4) throw Error("nu must lie in 1..4");
  if (!(s.rtol > 0.0 && s.rtol < 1.0)) throw Error("rtol must lie in (0, 1)");
  if (s.max_it < 1) throw Error("max-it must be positive");
  if (!(s.viscosity > 0.0)) throw Error("viscosity must be positive");
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// value and gradient of a finite-element field on one cell
struct CellField {
  std::vector<Vec2> value;
  std::vector<Mat2> grad;  // grad.m[i][j] = d u_i / d x_j
};

CellField eval_vector(const FunctionSpace& V, int cell, const Tabulation& tab, std::span<const double> x) {
  const auto dofs = V.cell_dofs(cell);
  CellField f;
  f.value.resize(tab.num_points());
  f.grad.resize(tab.num_points());
  for (int p = 0; p < tab.num_points(); ++p) {
    Vec2 v;
    Mat2 g;
    for (int i = 0; i < tab.num_dofs(); ++i) {
      const double c = x[dofs[i]];
      v.x += c * tab.value(p, i, 0);
      v.y += c * tab.value(p, i, 1);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g.m[a][b] += c * tab.grad(p, i, a, b);
    }
    f.value[p] = v;
    f.grad[p] = g;
  }
  return f;
}

}  // namespace

ErrorNorms error_norms(const MixedSpace& ms, std::span<const double> x) {
  const FunctionSpace& V = ms.velocity;
  const FunctionSpace& Q = ms.pressure;
  const Mesh& mesh = V.mesh();
  const int degree = 2 * ms.k + 4;
  const QuadratureRule rule = make_quadrature(mesh.shape(), degree);
  const auto xu = x.first(ms.velocity_size());
  const auto xp = x.subspan(ms.pressure_offset(), ms.pressure_size());

  ErrorNorms out;
  double err_u = 0.0, norm_u = 0.0;
  // pressure moments for mean removal: integral of e, e^2 and the area
  double area = 0.0, e1 = 0.0, e2 = 0.0;
  for (int c = 0; c < mesh.topology.count(2); ++c) {
    const CellMap map = CellMap::for_cell(mesh, c);
    const CellField u = eval_vector(V, c, cell_basis(V, c, rule.points), xu);
    const Tabulation tq = cell_basis(Q, c, rule.points);
    const auto qd = Q.cell_dofs(c);
    for (std::size_t p = 0; p < rule.size(); ++p) {
      const Point ref = rule.points[p];
      const Point phys = map.map(ref);
      const double w = rule.weights[p] * std::abs(map.jacobian(ref).det());
      const Vec2 ue = manufactured::velocity(phys);
      const Mat2 ge = manufactured::velocity_gradient(phys);
      const Vec2 uh = u.value[p];
      const Mat2& gh = u.grad[p];
      const double dx = uh.x - ue.x, dy = uh.y - ue.y;
      double s = dx * dx + dy * dy, n = ue.x * ue.x + ue.y * ue.y;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double d = gh.m[a][b] - ge.m[a][b];
          s += d * d;
          n += ge.m[a][b] * ge.m[a][b];
        }
      err_u += w * s;
      norm_u += w * n;
      out.max_divergence = std::max(out.max_divergence, std::abs(gh.m[0][0] + gh.m[1][1]));
      out.max_velocity = std::max(out.max_velocity, std::hypot(uh.x, uh.y));

      double ph = 0.0;
      for (int i = 0; i < tq.num_dofs(); ++i) ph += xp[qd[i]] * tq.value(static_cast<int>(p), i, 0);
      const double e = ph - manufactured::pressure(phys);
      area += w;
      e1 += w * e;
      e2 += w * e * e;
    }
  }
  out.velocity_h1_relative = std::sqrt(err_u / norm_u);
  // ||e - mean(e)||^2 = int e^2 - (int e)^2 / area
  out.pressure_l2 = std::sqrt(std::max(0.0, e2 - e1 * e1 / area));

  if (is_hdiv(ms.discretization)) {
    double jump = 0.0;
    for (int e = 0; e < mesh.topology.count(1); ++e) {
      if (mesh.topology.on_boundary({1, e})) continue;
      const FacetTables ft = jump_average_tables(V, e, degree);
      const CellField s0 = eval_vector(V, ft.cells[0], ft.side[0], xu);
      const CellField s1 = eval_vector(V, ft.cells[1], ft.side[1], xu);
      double sum = 0.0;
      for (std::size_t p = 0; p < ft.points.size(); ++p) {
        const double dx = s0.value[p].x - s1.value[p].x, dy = s0.value[p].y - s1.value[p].y;
        sum += ft.weights[p] * (dx * dx + dy * dy);
      }
      jump += sum / ft.length;
    }
    out.jump_seminorm = std::sqrt(jump);
  }
  return out;
}

namespace {

struct Solver {
  Hierarchy hierarchy;
  double setup_seconds;
};

Solver build_solver(const RunSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  Hierarchy h = Hierarchy::build(spec.discretization, spec.k, spec.multigrid_options());
  return {std::move(h), seconds_since(t0)};
}

KrylovReport solve(const Hierarchy& h, std::span<double> x, double rtol, int max_it, KrylovMonitor monitor = {}) {
  const Level& f = h.finest();
  const SparseMatrix& a = f.system.matrix;
  std::fill(x.begin(), x.end(), 0.0);
  return fgmres([&a](std::span<const double> v, std::span<double> y) { a.multiply(v, y); },
                [&h](std::span<const double> r, std::span<double> z) { h.v_cycle(r, z); }, f.system.rhs, x,
                {.rtol = rtol, .max_it = max_it, .nullspace = &f.nullspace, .monitor = std::move(monitor)});
}

}  // namespace

RunRecord run_case(const RunSpec& spec) {
  validate(spec);
  RunRecord rec;
  rec.spec = spec;
  Solver s = build_solver(spec);
  const Level& f = s.hierarchy.finest();
  rec.setup_seconds = s.setup_seconds;
  rec.n_dofs = f.space.velocity_size();
  rec.m_dofs = f.space.pressure_size();
  std::vector<double> x(f.space.size());
  const auto t0 = std::chrono::steady_clock::now();
  const KrylovReport rep = solve(s.hierarchy, x, spec.rtol, spec.max_it);
  rec.solve_seconds = seconds_since(t0);
  rec.iterations = rep.iterations;
  rec.converged = rep.converged;
  rec.errors = error_norms(f.space, x);
  return rec;
}

std::string_view weighting_name(Weighting w) { return w == Weighting::unit ? "unit" : "invmult"; }

Weighting parse_weighting(std::string_view s) {
  if (s == "invmult") return Weighting::inverse_multiplicity;
  if (s == "unit") return Weighting::unit;
  throw Error("unknown weighting '" + std::string(s) + "' (expected invmult or unit)");
}

std::string_view chebyshev_name(ChebyshevMode m) { return m == ChebyshevMode::repeat ? "repeat" : "degree"; }

ChebyshevMode parse_chebyshev(std::string_view s) {
  if (s == "degree") return ChebyshevMode::degree;
  if (s == "repeat") return ChebyshevMode::repeat;
  throw Error("unknown chebyshev mode '" + std::string(s) + "' (expected degree or repeat)");
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.10e", v); }

}  // namespace

std::string csv_header() {
  return "case,k,nu,levels,n_dofs,m_dofs,alpha,viscosity,rtol,iterations,converged,setup_s,solve_s,"
         "err_h1_vel_rel,err_l2_p_abs,max_div,jump_seminorm";
}

std::string csv_row(const RunRecord& r) {
  const RunSpec& s = r.spec;
  std::string out;
  out += discretization_name(s.discretization);
  out += ',' + std::to_string(s.k) + ',' + std::to_string(s.smoothing) + ',' + std::to_string(s.levels);
  out += ',' + std::to_string(r.n_dofs) + ',' + std::to_string(r.m_dofs);
  out += ',' + fmt("%g", s.effective_alpha()) + ',' + fmt("%g", s.viscosity) + ',' + fmt("%g", s.rtol);
  out += ',' + std::to_string(r.iterations) + ',' + (r.converged ? "1" : "0");
  out += ',' + fmt("%.6f", r.setup_seconds) + ',' + fmt("%.6f", r.solve_seconds);
  out += ',' + sci(r.errors.velocity_h1_relative) + ',' + sci(r.errors.pressure_l2);
  out += ',' + sci(r.errors.max_divergence) + ',' + sci(r.errors.jump_seminorm);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// drops a '#' comment that is not inside a quoted string
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::vector<std::string> items;  // scalar values have one item
  bool list = false;
};

std::string unquote(std::string_view s, int line) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
  if (s.empty() || s.find('"') != std::string_view::npos) throw Error("line " + std::to_string(line) + ": bad value");
  return std::string(s);
}

Value parse_value(std::string_view s, int line) {
  s = trim(s);
  Value v;
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw Error("line " + std::to_string(line) + ": unterminated list");
    v.list = true;
    std::string_view body = s.substr(1, s.size() - 2);
    while (!trim(body).empty()) {
      const auto comma = body.find(',');
      v.items.push_back(unquote(body.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    if (v.items.empty()) throw Error("line " + std::to_string(line) + ": empty list");
  } else {
    v.items.push_back(unquote(s, line));
  }
  return v;
}

template <class T>
T to_number(const std::string& s, const std::string& key) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error("key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::vector<int> int_list(const Value& v, const std::string& key) {
  std::vector<int> out;
  for (const auto& s : v.items) out.push_back(to_number<int>(s, key));
  return out;
}

}  // namespace

std::vector<RunSpec> parse_sweep_config(std::string_view text) {
  std::map<std::string, Value> kv;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') throw Error("line " + std::to_string(line_no) + ": tables are not supported");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    if (kv.count(key)) throw Error("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    kv[key] = parse_value(line.substr(eq + 1), line_no);
  }

  RunSpec base;
  std::vector<int> ks{base.k}, nus{base.smoothing}, levels{base.levels};
  bool have_case = false;
  for (const auto& [key, v] : kv) {
    const bool listable = key == "k" || key == "nu" || key == "levels";
    if (v.list && !listable) throw Error("key '" + key + "' does not accept a list");
    const std::string& s = v.items.front();
    if (key == "case") {
      base.discretization = parse_discretization(s);
      have_case = true;
    } else if (key == "k") {
      ks = int_list(v, key);
    } else if (key == "nu") {
      nus = int_list(v, key);
    } else if (key == "levels") {
      levels = int_list(v, key);
    } else if (key == "rtol") {
      base.rtol = to_number<double>(s, key);
    } else if (key == "max_it") {
      base.max_it = to_number<int>(s, key);
    } else if (key == "alpha") {
      base.alpha = to_number<double>(s, key);
    } else if (key == "viscosity") {
      base.viscosity = to_number<double>(s, key);
    } else if (key == "seed") {
      base.seed = to_number<std::uint64_t>(s, key);
    } else if (key == "weighting") {
      base.weighting = parse_weighting(s);
    } else if (key == "cheby") {
      base.chebyshev = parse_chebyshev(s);
    } else {
      throw Error("unknown key '" + key + "'");
    }
  }
  if (!have_case) throw Error("missing key 'case'");

  std::vector<RunSpec> out;
  for (int k : ks)
    for (int nu : nus)
      for (int l : levels) {
        RunSpec s = base;
        s.k = k;
        s.smoothing = nu;
        s.levels = l;
        validate(s);
        out.push_back(s);
      }
  return out;
}

std::vector<RunRecord> sweep(const std::vector<RunSpec>& specs, std::ostream& out) {
  for (const RunSpec& s : specs) validate(s);
  out << csv_header() << '\n' << std::flush;
  std::vector<RunRecord> records;
  for (const RunSpec& s : specs) {
    records.push_back(run_case(s));
    out << csv_row(records.back()) << '\n' << std::flush;
  }
  return records;
}

std::vector<double> stopping_thresholds() {
  std::vector<double> t;
  for (double r = 1e-2; r >= 1e-15; r *= 0.5) t.push_back(r);
  return t;
}

StoppingResult stopping_study(Discretization d, int k, int levels, const RunSpec& base) {
  RunSpec spec = base;
  spec.discretization = d;
  spec.k = k;
  spec.levels = levels;
  validate(spec);
  const Solver s = build_solver(spec);
  const Level& f = s.hierarchy.finest();

  StoppingResult res;
  res.discretization = d;
  res.k = k;
  res.levels = levels;
  res.n_dofs = f.space.velocity_size();
  res.m_dofs = f.space.pressure_size();

  const std::vector<double> thresholds = stopping_thresholds();
  std::size_t next = 0;
  bool reference_done = false;
  std::vector<double> iterate(f.space.size());
  const KrylovMonitor monitor = [&](int it, double rel, const IterateFn& form) {
    const bool hit_threshold = next < thresholds.size() && rel <= thresholds[next];
    const bool hit_reference = !reference_done && rel <= kReferenceRtol;
    if (!hit_threshold && !hit_reference) return false;
    form(iterate);
    const ErrorNorms e = error_norms(f.space, iterate);
    while (next < thresholds.size() && rel <= thresholds[next]) res.trace.push_back({thresholds[next++], it, e});
    if (hit_reference) {
      res.reference = StoppingPoint{kReferenceRtol, it, e};
      reference_done = true;
    }
    return next == thresholds.size() && reference_done;
  };
  std::vector<double> x(f.space.size());
  solve(s.hierarchy, x, 0.0, std::max(spec.max_it, 200), monitor);

  const auto& tr = res.trace;
  for (std::size_t i = 0; i + 2 < tr.size(); ++i) {
    const double a = tr[i].errors.velocity_h1_relative, b = tr[i + 2].errors.velocity_h1_relative;
    if (std::abs(a - b) <= kPlateauTolerance * b) {
      res.resolved = true;
      res.plateau = tr[i];
      break;
    }
  }
  return res;
}

std::string stopping_csv_header() {
  return "case,k,levels,h,n_dofs,m_dofs,rtol,iterations,err_h1_vel_rel,err_l2_p_abs,ref_err_h1_vel_rel,"
         "ref_err_l2_p_abs,status";
}

std::string stopping_csv_row(const StoppingResult& r) {
  const double h = 1.0 / (kBaseCellsPerSide << r.levels);
  std::string out;
  out += discretization_name(r.discretization);
  out += ',' + std::to_string(r.k) + ',' + std::to_string(r.levels) + ',' + fmt("%g", h);
  out += ',' + std::to_string(r.n_dofs) + ',' + std::to_string(r.m_dofs);
  if (r.resolved) {
    out += ',' + fmt("%.6e", r.plateau.rtol) + ',' + std::to_string(r.plateau.iterations);
    out += ',' + sci(r.plateau.errors.velocity_h1_relative) + ',' + sci(r.plateau.errors.pressure_l2);
  } else {
    out += ",,,,";
  }
  if (r.reference) {
    out += ',' + sci(r.reference->errors.velocity_h1_relative) + ',' + sci(r.reference->errors.pressure_l2);
  } else {
    out += ",,";
  }
  out += r.resolved ? ",resolved" : ",unresolved";
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("log_log_slope needs at least two matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace stokes
