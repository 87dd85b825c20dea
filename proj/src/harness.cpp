#include "otl/harness.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"
#include "otl/lemmas.hpp"
#include "otl/oracle.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace otl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

std::optional<double> parse_optional(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return parse_double(key, v);
}

std::string show_optional(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define OTL_DOUBLE(KEY, MEMBER)                                                                    \
  Field {                                                                                          \
    KEY, [](const ExperimentConfig& c) { return format_double(c.MEMBER); },                        \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_double(KEY, v); }         \
  }
#define OTL_OPTIONAL(KEY, MEMBER)                                                                  \
  Field {                                                                                          \
    KEY, [](const ExperimentConfig& c) { return show_optional(c.MEMBER); },                        \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_optional(KEY, v); }       \
  }
#define OTL_STRING(KEY, MEMBER)                                                                    \
  Field {                                                                                          \
    KEY, [](const ExperimentConfig& c) { return c.MEMBER; },                                       \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = v; }                            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      OTL_STRING("geometry.shape", shape),
      OTL_DOUBLE("geometry.R", R),
      OTL_DOUBLE("geometry.rho", rho),
      OTL_DOUBLE("geometry.h", h),
      Field{"model.kind", [](const ExperimentConfig& c) { return to_string(c.model_kind); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.model_kind = model_kind_from_string(v);
              } catch (const DomainError& e) {
                throw ConfigError("model.kind", e.what());
              }
            }},
      OTL_DOUBLE("model.p", p),
      OTL_DOUBLE("model.a", a),
      OTL_DOUBLE("model.alpha_log", alpha_log),
      OTL_OPTIONAL("model.g0", g0),
      OTL_OPTIONAL("model.g1", g1),
      OTL_OPTIONAL("model.C_mono", C_mono),
      Field{"data.kind", [](const ExperimentConfig& c) { return to_string(c.data_kind); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.data_kind = data_kind_from_string(v);
              } catch (const DomainError& e) {
                throw ConfigError("data.kind", e.what());
              }
            }},
      OTL_DOUBLE("data.c", c),
      OTL_DOUBLE("data.s", s),
      OTL_DOUBLE("data.theta0", theta0),
      OTL_DOUBLE("data.eps", eps),
      OTL_DOUBLE("solver.delta0", solver.delta0),
      OTL_DOUBLE("solver.delta_min", solver.delta_min),
      OTL_DOUBLE("solver.delta_shrink", solver.delta_shrink),
      OTL_DOUBLE("solver.grad_tol_rel", solver.grad_tol_rel),
      OTL_DOUBLE("solver.grad_tol_abs", solver.grad_tol_abs),
      Field{"solver.max_newton", [](const ExperimentConfig& c) { return std::to_string(c.solver.max_newton); },
            [](ExperimentConfig& c, const std::string& v) {
              const auto n = parse_int("solver.max_newton", v);
              if (n < 1 || n > 1000000) throw ConfigError("solver.max_newton", "must lie in [1, 10^6]");
              c.solver.max_newton = static_cast<int>(n);
            }},
      OTL_DOUBLE("solver.armijo_c", solver.armijo_c),
      OTL_DOUBLE("solver.cg_tol", solver.cg_tol),
      OTL_STRING("solver.initial_guess", solver.initial_guess),
      OTL_STRING("metrics.centers", centers),
      OTL_STRING("metrics.radii", radii),
      Field{"convergence.h",
            [](const ExperimentConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.convergence_h.size(); ++i) {
                if (i) s += ',';
                s += format_double(c.convergence_h[i]);
              }
              return s;
            },
            [](ExperimentConfig& c, const std::string& v) {
              c.convergence_h.clear();
              for (const auto& part : split(v, ',')) c.convergence_h.push_back(parse_double("convergence.h", part));
            }},
      Field{"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, const std::string& v) {
              const auto n = parse_int("seed", v);
              if (n < 0) throw ConfigError("seed", "must be nonnegative");
              c.seed = static_cast<std::uint64_t>(n);
            }},
      OTL_STRING("output_dir", output_dir),
  };
  return table;
}

#undef OTL_DOUBLE
#undef OTL_OPTIONAL
#undef OTL_STRING

} // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    set_config_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& f : fields()) {
    if (std::string_view(f.key) == "output_dir") continue;
    const std::string line = std::string(f.key) + "=" + f.get(cfg) + "\n";
    for (unsigned char ch : line) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct CentersSpec {
  std::string kind;
  long long n = 0;
};

CentersSpec parse_centers(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 2 || (parts[0] != "interface" && parts[0] != "grid")) {
    throw ConfigError("metrics.centers", "expected 'interface:k' or 'grid:n', got '" + spec + "'");
  }
  const auto n = parse_int("metrics.centers", parts[1]);
  if (n < 1 || n > 10000) throw ConfigError("metrics.centers", "count must lie in [1, 10^4]");
  return {parts[0], n};
}

std::pair<double, double> parse_radii(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3 || parts[0] != "dyadic") {
    throw ConfigError("metrics.radii", "expected 'dyadic:rmin:rmax', got '" + spec + "'");
  }
  const double lo = parse_double("metrics.radii", parts[1]);
  const double hi = parse_double("metrics.radii", parts[2]);
  if (!(lo > 0.0 && lo <= hi)) throw ConfigError("metrics.radii", "need 0 < rmin <= rmax");
  return {lo, hi};
}

void check_geometry_h(const ExperimentConfig& cfg, double h, const char* key) {
  if (!(h > 0.0)) throw ConfigError(key, "mesh size must be positive");
  if (cfg.shape == "disk" && !(h <= 0.5 * (cfg.R - cfg.rho))) {
    throw ConfigError(key, "mesh size must not exceed (R - rho)/2");
  }
  if (cfg.shape == "box" && !(std::abs(cfg.rho) < cfg.R - 2.0 * h)) {
    throw ConfigError(key, "interface line must stay 2h away from the boundary");
  }
}

} // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.shape != "disk" && cfg.shape != "box") throw ConfigError("geometry.shape", "must be 'disk' or 'box'");
  if (!(cfg.R > 0.0)) throw ConfigError("geometry.R", "must be positive");
  if (cfg.shape == "disk" && !(cfg.rho > 0.0 && cfg.rho < cfg.R)) {
    throw ConfigError("geometry.rho", "must lie in (0, R)");
  }
  if (cfg.shape == "box" && !(std::abs(cfg.rho) < cfg.R)) throw ConfigError("geometry.rho", "must lie in (-R, R)");
  check_geometry_h(cfg, cfg.h, "geometry.h");

  if (!(cfg.p > 2.0)) throw ConfigError("model.p", "must exceed 2");
  if (cfg.model_kind == ModelKind::power_log) {
    if (!(cfg.a > 1.0)) throw ConfigError("model.a", "must exceed 1");
    if (!(cfg.alpha_log > 0.0)) throw ConfigError("model.alpha_log", "must be positive");
  }
  const Nonlinearity nl = make_model(cfg);
  if (!(nl.g0 >= 1.0)) throw ConfigError("model.g0", "must be at least 1");
  if (!(nl.g0 <= nl.g1)) throw ConfigError("model.g1", "must be at least g0");
  if (!(nl.C_mono > 0.0)) throw ConfigError("model.C_mono", "must be positive");

  if (cfg.data_kind == DataKind::angular_power) {
    if (!(cfg.s >= 0.0)) throw ConfigError("data.s", "must be nonnegative");
    if (!(cfg.eps > 0.0)) throw ConfigError("data.eps", "must be positive");
    const double p_dual = cfg.p / (cfg.p - 1.0);
    if (!(cfg.s * (p_dual + cfg.eps) < 1.0)) throw ConfigError("data.s", "requires s (p' + eps) < 1");
  }

  SolverConfig sc = cfg.solver;
  sc.check();

  parse_centers(cfg.centers);
  parse_radii(cfg.radii);
  if (cfg.convergence_h.empty()) throw ConfigError("convergence.h", "needs at least one mesh size");
  for (double h : cfg.convergence_h) check_geometry_h(cfg, h, "convergence.h");
}

Nonlinearity make_model(const ExperimentConfig& cfg) {
  Nonlinearity nl = cfg.model_kind == ModelKind::power ? Nonlinearity::power(cfg.p)
                                                       : Nonlinearity::power_log(cfg.p, cfg.a, cfg.alpha_log);
  if (cfg.g0) nl.g0 = *cfg.g0;
  if (cfg.g1) nl.g1 = *cfg.g1;
  if (cfg.C_mono) nl.C_mono = *cfg.C_mono;
  return nl;
}

namespace {

bool has_nonfinite_constants(const Nonlinearity& nl) {
  return !std::isfinite(nl.g0) || !std::isfinite(nl.g1) || !std::isfinite(nl.C_mono);
}

/// The model as fed to a solver: valid and passing the ellipticity check.
Nonlinearity checked_model(const ExperimentConfig& cfg) {
  const Nonlinearity nl = make_model(cfg);
  if (has_nonfinite_constants(nl)) throw ConfigError("model", "constants must be finite");
  const auto rep = validate_ellipticity(nl);
  if (!rep.pass) {
    throw ConfigError(rep.g0_hat < nl.g0 - 1e-9 ? "model.g0" : "model.g1",
                      "claimed bounds fail the ellipticity check (g0_hat=" + format_double(rep.g0_hat) +
                          ", g1_hat=" + format_double(rep.g1_hat) + ")");
  }
  return nl;
}

SolverConfig solver_config(const ExperimentConfig& cfg) {
  SolverConfig sc = cfg.solver;
  sc.seed = cfg.seed;
  return sc;
}

} // namespace

InterfaceData make_data(const ExperimentConfig& cfg) {
  if (cfg.data_kind == DataKind::constant) return InterfaceData::constant(cfg.c);
  try {
    return InterfaceData::angular_power(cfg.c, cfg.s, cfg.theta0, cfg.eps, cfg.p);
  } catch (const DomainError& e) {
    throw ConfigError("data.s", e.what());
  }
}

Mesh make_mesh(const ExperimentConfig& cfg, double h) {
  try {
    return cfg.shape == "disk" ? build_disk_mesh(cfg.R, cfg.rho, h) : build_box_mesh(cfg.R, cfg.rho, h);
  } catch (const MeshError& e) {
    throw ConfigError("geometry.h", e.what());
  }
}

std::vector<Center> make_centers(const ExperimentConfig& cfg, const Mesh& mesh) {
  const auto spec = parse_centers(cfg.centers);
  std::vector<Center> out;
  if (spec.kind == "interface") {
    for (long long k = 0; k < spec.n; ++k) {
      double t = 0.0;
      if (mesh.geometry == Geometry::disk_circle) {
        t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(spec.n);
      } else {
        t = spec.n == 1 ? 0.0 : -0.5 * mesh.R + mesh.R * static_cast<double>(k) / static_cast<double>(spec.n - 1);
      }
      out.push_back({mesh.interface_point(t), true});
    }
  } else {
    for (long long i = 0; i < spec.n; ++i) {
      for (long long j = 0; j < spec.n; ++j) {
        const auto coord = [&](long long k) {
          return spec.n == 1 ? 0.0 : -0.5 * mesh.R + mesh.R * static_cast<double>(k) / static_cast<double>(spec.n - 1);
        };
        const Point x(coord(j), coord(i));
        if (mesh.distance_to_boundary(x) > 0.0) out.push_back({x, false});
      }
    }
  }
  return out;
}

std::vector<double> make_radii(const ExperimentConfig& cfg, const Mesh& mesh, const std::vector<Center>& centers) {
  const auto [lo, hi] = parse_radii(cfg.radii);
  std::vector<double> out;
  for (double r = hi; r >= lo * (1.0 - 1e-12); r *= 0.5) {
    if (r >= 4.0 * mesh.h) out.push_back(r);
  }
  if (out.empty()) {
    throw ConfigError("metrics.radii", "no radius is at least 4h = " + format_double(4.0 * mesh.h));
  }
  for (const auto& c : centers) {
    if (!mesh.contains_ball(c.x, out.front())) {
      throw ConfigError("metrics.radii", "ball of radius " + format_double(out.front()) + " leaves the domain");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void write_json(const ordered_json& j, const fs::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

ordered_json config_object(const ExperimentConfig& cfg) {
  ordered_json o;
  for (const auto& f : fields()) {
    if (std::string_view(f.key) != "output_dir") o[f.key] = f.get(cfg);
  }
  return o;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ArtifactError("missing artifact " + path.string());
}

void require_csv_hash(const fs::path& path, const std::string& hash) {
  require_file(path);
  const auto table = read_csv(path);
  const auto found = comment_value(table, "config_hash");
  if (found != hash) {
    throw ArtifactError(path.filename().string() + " carries config hash '" + found + "', expected '" + hash + "'");
  }
}

void require_json_hash(const fs::path& path, const std::string& hash) {
  require_file(path);
  std::ifstream in(path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(path.filename().string() + " is not valid JSON: " + e.what());
  }
  const std::string found = j.value("config_hash", std::string());
  if (found != hash) {
    throw ArtifactError(path.filename().string() + " carries config hash '" + found + "', expected '" + hash + "'");
  }
}

std::optional<RadialSolution> oracle_for(const ExperimentConfig& cfg) {
  if (cfg.shape != "disk" || cfg.model_kind != ModelKind::power || cfg.data_kind != DataKind::constant ||
      !(cfg.c > 0.0)) {
    return std::nullopt;
  }
  return radial_solution(2, cfg.p, cfg.rho, cfg.R, cfg.c);
}

RadialSolution require_oracle(const ExperimentConfig& cfg) {
  if (cfg.shape != "disk") throw ConfigError("geometry.shape", "the radial oracle needs the disk geometry");
  if (cfg.model_kind != ModelKind::power) throw ConfigError("model.kind", "the radial oracle needs the power model");
  if (cfg.data_kind != DataKind::constant) throw ConfigError("data.kind", "the radial oracle needs constant data");
  if (!(cfg.c > 0.0)) throw ConfigError("data.c", "the radial oracle needs positive data");
  return *oracle_for(cfg);
}

} // namespace

FieldError oracle_error(const DiscreteField& u, const ExperimentConfig& cfg) {
  const RadialSolution sol = require_oracle(cfg);
  const Mesh& mesh = u.mesh();
  FieldError err;
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    err.linf = std::max(err.linf, std::abs(u[i] - sol.u(mesh.vertices[i].norm())));
  }
  // Seven-point degree-5 rule per triangle.
  static constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115;
  static constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456;
  static constexpr double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
  const double bary[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                             {a2, b2, b2},                {b2, a2, b2}, {b2, b2, a2}};
  const double w[7] = {w0, w1, w1, w1, w2, w2, w2};
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    double local = 0.0;
    for (int q = 0; q < 7; ++q) {
      Point x = Point::Zero();
      double uh = 0.0;
      for (int k = 0; k < 3; ++k) {
        x += bary[q][k] * mesh.vertices[v[k]];
        uh += bary[q][k] * u[v[k]];
      }
      const double e = uh - sol.u(x.norm());
      local += w[q] * e * e;
    }
    sum += mesh.area(t) * local;
  }
  err.l2 = std::sqrt(sum);
  return err;
}

SolveSummary run_solve(const ExperimentConfig& cfg, const fs::path& out) {
  validate_config(cfg);
  const Nonlinearity nl = checked_model(cfg);
  const InterfaceData f = make_data(cfg);
  const Mesh mesh = make_mesh(cfg, cfg.h);
  const SolverConfig sc = solver_config(cfg);
  const SolveResult res = minimize(mesh, nl, f, sc);
  const std::string hash = config_hash(cfg);

  write_mesh_csv(mesh, out, hash);
  write_solution_csv(res.u, out / "solution.csv", hash);
  write_gradient_csv(res.u, out / "gradient.csv", hash);
  write_trace_json(res.trace, out / "trace.json", hash);

  SolveSummary sum;
  sum.residual = res.residual;
  sum.tolerance = res.tolerance;
  sum.energy = assemble_energy(mesh, nl, f, res.u, sc.delta_min);
  for (const auto& t : res.trace) sum.newton_steps += t.iter > 0 ? 1 : 0;
  sum.num_vertices = mesh.num_vertices();
  sum.num_triangles = mesh.num_triangles();
  sum.mesh_h = mesh.h;
  sum.cg_fallbacks = res.cg_fallbacks;

  ordered_json m;
  m["config_hash"] = hash;
  m["version"] = kVersion;
  m["config"] = config_object(cfg);
  m["artifacts"] = {"vertices.csv", "triangles.csv", "interface.csv", "solution.csv", "gradient.csv", "trace.json"};
  m["mesh"] = {{"num_vertices", sum.num_vertices}, {"num_triangles", sum.num_triangles}, {"h", sum.mesh_h}};
  m["solve"] = {{"residual", sum.residual},
                {"tolerance", sum.tolerance},
                {"energy", sum.energy},
                {"newton_steps", sum.newton_steps},
                {"cg_fallbacks", sum.cg_fallbacks}};
  write_json(m, out / "manifest.json");
  return sum;
}

RegularityReport run_metrics(const ExperimentConfig& cfg, const fs::path& dir, const fs::path& out) {
  validate_config(cfg);
  const std::string hash = config_hash(cfg);
  require_json_hash(dir / "manifest.json", hash);
  require_json_hash(dir / "trace.json", hash);
  for (const char* name : {"vertices.csv", "triangles.csv", "interface.csv", "solution.csv", "gradient.csv"}) {
    require_csv_hash(dir / name, hash);
  }
  const Mesh mesh = make_mesh(cfg, cfg.h);
  const DiscreteField u = read_solution_csv(mesh, dir / "solution.csv");
  const InterfaceData f = make_data(cfg);
  const auto centers = make_centers(cfg, mesh);
  const auto radii = make_radii(cfg, mesh, centers);
  std::optional<double> f_sup;
  if (f.bounded()) f_sup = f.sup_norm();
  RegularityReport rep = regularity_report(u, cfg.p, f_sup, centers, radii);
  rep.config_hash = hash;
  write_report_json(rep, out / "report.json");
  write_metrics_csv(rep, out / "metrics.csv");
  return rep;
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg, const std::vector<double>& h_list,
                                            const fs::path& out) {
  validate_config(cfg);
  require_oracle(cfg);
  if (h_list.empty()) throw ConfigError("convergence.h", "needs at least one mesh size");
  for (double h : h_list) check_geometry_h(cfg, h, "convergence.h");
  const Nonlinearity nl = checked_model(cfg);
  const InterfaceData f = make_data(cfg);
  const SolverConfig sc = solver_config(cfg);

  std::vector<ConvergenceRow> rows;
  for (double h : h_list) {
    const Mesh mesh = make_mesh(cfg, h);
    const SolveResult res = minimize(mesh, nl, f, sc);
    const FieldError err = oracle_error(res.u, cfg);
    ConvergenceRow row;
    row.h = h;
    row.mesh_h = mesh.h;
    row.num_vertices = mesh.num_vertices();
    row.l2 = err.l2;
    row.linf = err.linf;
    std::size_t center = 0;
    for (std::size_t i = 1; i < mesh.num_vertices(); ++i) {
      if (mesh.vertices[i].norm() < mesh.vertices[center].norm()) center = i;
    }
    row.u_inner = res.u[center];
    row.residual = res.residual;
    if (!rows.empty()) {
      const auto& prev = rows.back();
      const double ratio = std::log(prev.h / h);
      row.eoc_l2 = std::log(prev.l2 / row.l2) / ratio;
      row.eoc_linf = std::log(prev.linf / row.linf) / ratio;
    }
    rows.push_back(row);
  }

  auto file = open_output(out / "convergence.csv");
  file << "# config_hash=" << config_hash(cfg) << '\n';
  file << "h,mesh_h,n_vertices,l2,linf,eoc_l2,eoc_linf,u_inner,residual\n";
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    file << format_double(r.h) << ',' << format_double(r.mesh_h) << ',' << r.num_vertices << ','
         << format_double(r.l2) << ',' << format_double(r.linf) << ',' << opt(r.eoc_l2) << ',' << opt(r.eoc_linf)
         << ',' << format_double(r.u_inner) << ',' << format_double(r.residual) << '\n';
  }
  return rows;
}

bool run_validate_g(const ExperimentConfig& cfg, const fs::path& out, std::string* summary) {
  validate_config(cfg);
  const Nonlinearity nl = make_model(cfg);
  const auto ell = validate_ellipticity(nl);
  const auto mono = estimate_monotonicity_constant(nl, nl.p, 100000, cfg.seed);
  ordered_json j;
  j["config_hash"] = config_hash(cfg);
  j["model"] = {{"kind", to_string(nl.kind)}, {"p", nl.p}, {"a", nl.a}, {"alpha_log", nl.alpha_log}};
  j["ellipticity"] = {{"g0", nl.g0}, {"g1", nl.g1}, {"g0_hat", ell.g0_hat}, {"g1_hat", ell.g1_hat},
                      {"grid", "10^4 log-spaced points in [1e-8, 1e8]"}, {"pass", ell.pass}};
  j["monotonicity"] = {{"C_hat", mono.C_hat},
                       {"C_mono_claimed", nl.C_mono},
                       {"xi", {mono.xi.x(), mono.xi.y()}},
                       {"zeta", {mono.zeta.x(), mono.zeta.y()}},
                       {"n_samples", mono.n_samples},
                       {"seed", cfg.seed}};
  write_json(j, out / "validate_g.json");
  if (summary) {
    *summary = "g0_hat=" + format_double(ell.g0_hat) + " g1_hat=" + format_double(ell.g1_hat) +
               " pass=" + (ell.pass ? "true" : "false") + " C_hat=" + format_double(mono.C_hat);
  }
  return ell.pass;
}

void run_oracle(const ExperimentConfig& cfg, const fs::path& out, std::string* summary) {
  validate_config(cfg);
  const RadialSolution sol = require_oracle(cfg);
  const RadialProfile prof = shoot_radial(2, cfg.p, cfg.rho, cfg.R, cfg.c, 2000);
  double shoot_err = 0.0;
  for (std::size_t i = 0; i < prof.r.size(); ++i) shoot_err = std::max(shoot_err, std::abs(prof.u[i] - sol.u(prof.r[i])));
  const std::string hash = config_hash(cfg);
  ordered_json j;
  j["config_hash"] = hash;
  j["d"] = sol.d;
  j["p"] = sol.p;
  j["rho"] = sol.rho;
  j["R"] = sol.R;
  j["f_const"] = sol.f_const;
  j["kappa"] = sol.kappa;
  j["A"] = sol.A;
  j["u_inner"] = sol.u_inner;
  j["outer_slope_at_rho"] = sol.du(sol.rho);
  j["shoot_max_abs_error"] = shoot_err;
  write_json(j, out / "oracle.json");
  write_oracle_profile(sol, 1001, out / "oracle_profile.csv", hash);
  if (summary) {
    *summary = "kappa=" + format_double(sol.kappa) + " A=" + format_double(sol.A) +
               " u_inner=" + format_double(sol.u_inner) + " u'(rho+)=" + format_double(sol.du(sol.rho)) +
               " shoot_err=" + format_double(shoot_err);
  }
}

std::size_t run_lemma_serrin(double p, std::size_t trials, std::uint64_t seed, const fs::path& out,
                             std::string* summary) {
  const SerrinReport rep = check_serrin(p, trials, seed);
  ordered_json j;
  j["lemma"] = "serrin";
  j["p"] = p;
  j["trials"] = rep.trials;
  j["seed"] = seed;
  j["near_boundary_trials"] = rep.near_boundary_trials;
  j["equality_cases"] = rep.equality_cases;
  j["max_log_gap"] = rep.max_log_gap;
  auto& v = j["violations"] = ordered_json::array();
  for (const auto& viol : rep.violations) {
    ordered_json terms = ordered_json::array();
    for (const auto& t : viol.terms) terms.push_back({{"a", t.a}, {"q", t.q}});
    v.push_back({{"terms", terms}, {"log_z", viol.log_z}, {"log_bound", viol.log_bound}});
  }
  write_json(j, out / "serrin.json");
  if (summary) {
    *summary = "trials=" + std::to_string(rep.trials) + " violations=" + std::to_string(rep.violations.size()) +
               " max_log_gap=" + format_double(rep.max_log_gap);
  }
  return rep.violations.size();
}

std::size_t run_lemma_iterate(std::size_t trials, std::uint64_t seed, const fs::path& out, std::string* summary) {
  const IterationSuiteReport rep = check_iteration(trials, seed);
  ordered_json j;
  j["lemma"] = "iterate";
  j["trials"] = rep.trials;
  j["seed"] = seed;
  j["failures"] = rep.failures;
  j["max_scaled_ratio"] = rep.max_scaled_ratio;
  j["max_global_ratio"] = rep.max_global_ratio;
  j["violations"] = rep.failed_trials;
  write_json(j, out / "iterate.json");
  if (summary) {
    *summary = "trials=" + std::to_string(rep.trials) + " failures=" + std::to_string(rep.failures) +
               " max_global_ratio=" + format_double(rep.max_global_ratio);
  }
  return rep.failures;
}

} // namespace otl
