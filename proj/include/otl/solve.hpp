#pragma once

#include "otl/fem.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace otl {

struct SolverConfig {
  double delta0 = 1e-1;
  double delta_min = 1e-6;
  double delta_shrink = 0.1;
  /// Residual tolerance grad_tol_rel * |load| + grad_tol_abs.
  double grad_tol_rel = 1e-9;
  double grad_tol_abs = 1e-12;
  int max_newton = 100;
  double armijo_c = 1e-4;
  double cg_tol = 1e-10;
  std::uint64_t seed = 0;
  /// "zero" or "random" (uniform in [-1, 1] at free vertices, seeded).
  std::string initial_guess = "zero";

  /// Throws ConfigError naming the offending solver.* key.
  void check() const;
};

struct TraceRecord {
  double stage_delta;
  int iter;
  double energy;
  double residual;
  double step_len;
  /// E(u_new) - E(u_old) of the accepted step, computed from the increment.
  double decrease;
};

struct SolveResult {
  DiscreteField u;
  std::vector<TraceRecord> trace;
  double residual = 0.0;  ///< weak residual at delta_min
  double tolerance = 0.0; ///< residual target that was met
  int cg_fallbacks = 0;
};

/// Jacobi-preconditioned conjugate gradients. Returns x with
/// |H x - b| <= tol |b|; throws LinearSolveError after max_iter iterations
/// (default 10 n).
Eigen::VectorXd cg_solve(const SparseMatrix& H, const Eigen::VectorXd& b, double tol, long max_iter = -1);

/// Damped Newton with delta continuation on an arbitrary discretization,
/// starting from `initial` (non-free vertices keep their initial values).
/// `tolerance` is the residual target at the final stage.
SolveResult newton_minimize(const Discretization& disc, const DiscreteField& initial, const SolverConfig& config,
                            double tolerance);

/// Minimizer of the regularized energy on the whole mesh.
SolveResult minimize(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f, const SolverConfig& config);
SolveResult minimize(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f, const SolverConfig& config,
                     const DiscreteField& initial);

/// Vertices free in the ball replacement: every incident triangle lies in
/// the patch and the vertex is not on the outer boundary.
std::vector<bool> patch_interior_mask(const Mesh& mesh, const std::vector<std::size_t>& patch);

/// g-harmonic replacement of u_bc on the barycenter patch of B_r(x0):
/// minimizes the patch energy with the patch-boundary values of u_bc fixed
/// and equals u_bc off the patch.
DiscreteField p_harmonic_replacement(const Mesh& mesh, const Nonlinearity& nl, const DiscreteField& u_bc,
                                     const Point& x0, double r, const SolverConfig& config);

/// trace.json: {config_hash, records: [{stage_delta, iter, energy, residual, step_len, decrease}]}
void write_trace_json(const std::vector<TraceRecord>& trace, const std::filesystem::path& path,
                      const std::string& hash);

} // namespace otl
