#pragma once

#include "otl/fem.hpp"
#include "otl/metrics.hpp"
#include "otl/solve.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace otl {

inline constexpr const char* kVersion = "0.1.0";

/// Experiment description. Serialized as a flat "key = value" file with
/// dotted keys; blank lines and lines starting with '#' are ignored.
struct ExperimentConfig {
  // geometry.shape: "disk" (circle interface of radius rho) or "box"
  // (square of half-width R with the interface y = rho).
  std::string shape = "disk";
  double R = 1.0;
  double rho = 0.5;
  double h = 0.0625;

  ModelKind model_kind = ModelKind::power;
  double p = 3.0;
  double a = 2.0;
  double alpha_log = 1.0;
  std::optional<double> g0; ///< unset: the family's exact bound
  std::optional<double> g1;
  std::optional<double> C_mono;

  DataKind data_kind = DataKind::constant;
  double c = 1.0;
  double s = 0.0;
  double theta0 = 0.0;
  double eps = 0.0;

  SolverConfig solver;

  std::string centers = "interface:8";
  std::string radii = "dyadic:0.025:0.2";
  std::vector<double> convergence_h = {0.125, 0.0625, 0.03125};

  std::uint64_t seed = 0;
  /// Not part of the hash: where the artifacts go does not change them.
  std::string output_dir = "out";
};

/// Throws ConfigError naming the key for unknown keys or unparsable values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text: every key, fixed order, shortest round-trip doubles.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical text without output_dir, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
/// Sets one key from its textual value (same rules as parse_config).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Checks every sub-invariant; throws ConfigError naming the failing key.
void validate_config(const ExperimentConfig& cfg);

Nonlinearity make_model(const ExperimentConfig& cfg);
InterfaceData make_data(const ExperimentConfig& cfg);
Mesh make_mesh(const ExperimentConfig& cfg, double h);
/// "interface:k" (k equally spaced points on Gamma) or "grid:n" (n x n
/// lattice over the inner half of Omega, kept when inside Omega).
std::vector<Center> make_centers(const ExperimentConfig& cfg, const Mesh& mesh);
/// "dyadic:rmin:rmax": rmax, rmax/2, ... down to rmin, dropping radii below
/// 4h. Throws ConfigError when nothing is left or a ball leaves Omega.
std::vector<double> make_radii(const ExperimentConfig& cfg, const Mesh& mesh, const std::vector<Center>& centers);

struct SolveSummary {
  double residual = 0.0;
  double tolerance = 0.0;
  double energy = 0.0;
  std::size_t newton_steps = 0;
  std::size_t num_vertices = 0;
  std::size_t num_triangles = 0;
  double mesh_h = 0.0;
  int cg_fallbacks = 0;
};

/// vertices.csv, triangles.csv, interface.csv, solution.csv, gradient.csv,
/// trace.json and manifest.json under `out`.
SolveSummary run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// report.json and metrics.csv under `out` from the artifacts in `dir`.
/// Throws ArtifactError when an artifact is missing or carries another hash.
RegularityReport run_metrics(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                             const std::filesystem::path& out);

struct ConvergenceRow {
  double h = 0.0;
  double mesh_h = 0.0;
  std::size_t num_vertices = 0;
  double l2 = 0.0;
  double linf = 0.0;
  std::optional<double> eoc_l2;
  std::optional<double> eoc_linf;
  double u_inner = 0.0;
  double residual = 0.0;
};

/// Errors against the radial closed form for each h; convergence.csv under
/// `out`. Throws ConfigError unless the configuration has an oracle
/// (disk, power model, constant positive data).
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg, const std::vector<double>& h_list,
                                            const std::filesystem::path& out);

/// Discrete L2 and max-vertex errors of u against the radial closed form.
struct FieldError {
  double l2 = 0.0;
  double linf = 0.0;
};
FieldError oracle_error(const DiscreteField& u, const ExperimentConfig& cfg);

/// validate_g.json; returns whether the claimed constants pass.
bool run_validate_g(const ExperimentConfig& cfg, const std::filesystem::path& out, std::string* summary);
/// oracle.json and oracle_profile.csv.
void run_oracle(const ExperimentConfig& cfg, const std::filesystem::path& out, std::string* summary);
/// serrin.json; returns the violation count.
std::size_t run_lemma_serrin(double p, std::size_t trials, std::uint64_t seed, const std::filesystem::path& out,
                             std::string* summary);
/// iterate.json; returns the failure count.
std::size_t run_lemma_iterate(std::size_t trials, std::uint64_t seed, const std::filesystem::path& out,
                              std::string* summary);

} // namespace otl
