#include "otl/solve.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"
#include "otl/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace otl {

void SolverConfig::check() const {
  if (!(delta0 > 0.0)) throw ConfigError("solver.delta0", "must be positive");
  if (!(delta_min > 0.0 && delta_min <= delta0)) throw ConfigError("solver.delta_min", "must lie in (0, delta0]");
  if (!(delta_shrink > 0.0 && delta_shrink < 1.0)) throw ConfigError("solver.delta_shrink", "must lie in (0, 1)");
  if (!(grad_tol_rel > 0.0)) throw ConfigError("solver.grad_tol_rel", "must be positive");
  if (!(grad_tol_abs > 0.0)) throw ConfigError("solver.grad_tol_abs", "must be positive");
  if (max_newton < 1) throw ConfigError("solver.max_newton", "must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 0.5)) throw ConfigError("solver.armijo_c", "must lie in (0, 0.5)");
  if (!(cg_tol > 0.0)) throw ConfigError("solver.cg_tol", "must be positive");
  if (initial_guess != "zero" && initial_guess != "random") {
    throw ConfigError("solver.initial_guess", "must be 'zero' or 'random'");
  }
}

Eigen::VectorXd cg_solve(const SparseMatrix& H, const Eigen::VectorXd& b, double tol, long max_iter) {
  const Eigen::Index n = b.size();
  if (H.rows() != n || H.cols() != n) throw LinearSolveError("matrix and right-hand side sizes differ");
  if (max_iter < 0) max_iter = 10 * static_cast<long>(n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) return x;
  Eigen::VectorXd inv_diag = H.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) throw LinearSolveError("matrix has a nonpositive diagonal entry");
    inv_diag[i] = 1.0 / inv_diag[i];
  }
  const double target = tol * b_norm;
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd Hp(n);
  double rz = r.dot(z);
  for (long it = 0; it < max_iter; ++it) {
    Hp.noalias() = H * p;
    const double curv = p.dot(Hp);
    if (!(curv > 0.0)) throw LinearSolveError("matrix is not positive definite along a search direction");
    const double step = rz / curv;
    x += step * p;
    r -= step * Hp;
    if (r.norm() <= target) {
      // The recursively updated residual drifts; confirm with the true one.
      const Eigen::VectorXd true_r = b - H * x;
      if (true_r.norm() <= target) return x;
      r = true_r;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw LinearSolveError("conjugate gradients did not converge within " + std::to_string(max_iter) +
                         " iterations");
}

namespace {

std::vector<double> delta_schedule(const SolverConfig& config) {
  std::vector<double> stages;
  for (double d = config.delta0; d > config.delta_min * (1.0 + 1e-12); d *= config.delta_shrink) {
    stages.push_back(d);
  }
  stages.push_back(config.delta_min);
  return stages;
}

} // namespace

SolveResult newton_minimize(const Discretization& disc, const DiscreteField& initial, const SolverConfig& config,
                            double tolerance) {
  config.check();
  SolveResult result{initial, {}, 0.0, tolerance, 0};
  Eigen::VectorXd x = disc.restrict_to_free(initial);
  const auto stages = delta_schedule(config);

  for (std::size_t s = 0; s < stages.size(); ++s) {
    const double delta = stages[s];
    const bool last = s + 1 == stages.size();
    DiscreteField u = disc.extend(x, initial);
    double energy = disc.energy(u, delta);
    Eigen::VectorXd g = disc.gradient(u, delta);
    double residual = g.norm();
    result.trace.push_back({delta, 0, energy, residual, 0.0, 0.0});

    for (int it = 1; it <= config.max_newton && residual > tolerance; ++it) {
      Eigen::VectorXd d;
      try {
        d = -cg_solve(disc.hessian(u, delta), g, config.cg_tol);
      } catch (const LinearSolveError&) {
        d = -g;
        ++result.cg_fallbacks;
      }
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        d = -g;
        slope = -g.squaredNorm();
      }
      double t = 1.0;
      double dE = 0.0;
      bool accepted = false;
      for (int halving = 0; halving <= 50; ++halving, t *= 0.5) {
        dE = disc.energy_increment(u, d, t, delta);
        if (dE <= config.armijo_c * t * slope && dE < 0.0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw DivergenceError("line search failed after 50 halvings at delta=" + format_double(delta) +
                              ", residual=" + format_double(residual));
      }
      x += t * d;
      u = disc.extend(x, initial);
      energy += dE;
      g = disc.gradient(u, delta);
      residual = g.norm();
      result.trace.push_back({delta, it, energy, residual, t * d.norm(), dE});
    }
    if (last) {
      if (residual > tolerance) {
        throw SolverError("Newton did not reach the residual tolerance " + format_double(tolerance) +
                          " within " + std::to_string(config.max_newton) + " iterations (residual " +
                          format_double(residual) + ")");
      }
      result.u = u;
      result.residual = residual;
    }
  }
  return result;
}

SolveResult minimize(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f, const SolverConfig& config) {
  config.check();
  DiscreteField initial(mesh);
  if (config.initial_guess == "random") {
    Rng rng(config.seed);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      if (!mesh.on_boundary[i]) initial.set(i, rng.uniform(-1.0, 1.0));
    }
  }
  return minimize(mesh, nl, f, config, initial);
}

SolveResult minimize(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f, const SolverConfig& config,
                     const DiscreteField& initial) {
  const Discretization disc(mesh, nl, f);
  const double tol = config.grad_tol_rel * disc.load().norm() + config.grad_tol_abs;
  return newton_minimize(disc, initial, config, tol);
}

std::vector<bool> patch_interior_mask(const Mesh& mesh, const std::vector<std::size_t>& patch) {
  std::vector<bool> in_patch(mesh.num_triangles(), false);
  for (auto t : patch) in_patch[t] = true;
  std::vector<bool> touches_patch(mesh.num_vertices(), false);
  std::vector<bool> touches_outside(mesh.num_vertices(), false);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (auto v : mesh.triangles[t].v) {
      (in_patch[t] ? touches_patch : touches_outside)[v] = true;
    }
  }
  std::vector<bool> mask(mesh.num_vertices(), false);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = touches_patch[i] && !touches_outside[i] && !mesh.on_boundary[i];
  }
  return mask;
}

DiscreteField p_harmonic_replacement(const Mesh& mesh, const Nonlinearity& nl, const DiscreteField& u_bc,
                                     const Point& x0, double r, const SolverConfig& config) {
  if (&u_bc.mesh() != &mesh) throw StructuralError("boundary field does not belong to this mesh");
  auto patch = ball_patch(mesh, x0, r);
  const auto mask = patch_interior_mask(mesh, patch);
  const Discretization disc(mesh, nl, InterfaceData::constant(0.0), mask, std::move(patch));
  if (disc.num_free() == 0) return u_bc;
  // No load on the patch problem: scale the target by the initial residual.
  const double g0 = disc.gradient(u_bc, config.delta0).norm();
  const double tol = config.grad_tol_rel * g0 + config.grad_tol_abs;
  return newton_minimize(disc, u_bc, config, tol).u;
}

void write_trace_json(const std::vector<TraceRecord>& trace, const std::filesystem::path& path,
                      const std::string& hash) {
  nlohmann::ordered_json j;
  j["config_hash"] = hash;
  auto& recs = j["records"] = nlohmann::ordered_json::array();
  for (const auto& t : trace) {
    recs.push_back({{"stage_delta", t.stage_delta},
                    {"iter", t.iter},
                    {"energy", t.energy},
                    {"residual", t.residual},
                    {"step_len", t.step_len},
                    {"decrease", t.decrease}});
  }
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

} // namespace otl
