#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace otl {

// ---------------------------------------------------------------------------
// Serrin-type numeric inequality: if z^p <= sum_i a_i z^(q_i) with
// 0 <= q_i < p, then z <= N^(max gamma_i) sum_i a_i^(gamma_i), where
// gamma_i = 1/(p - q_i).

struct SerrinTerm {
  double a;
  double q;
};

/// N^(max gamma) * sum a_i^gamma_i. Throws DomainError for q_i >= p, a_i <= 0.
double serrin_bound(double p, std::span<const SerrinTerm> terms);
/// log of serrin_bound, finite even when the bound overflows a double.
double serrin_log_bound(double p, std::span<const SerrinTerm> terms);
/// log z for the unique z > 0 with z^p = sum a_i z^(q_i).
double serrin_constraint_log_root(double p, std::span<const SerrinTerm> terms);

struct SerrinViolation {
  std::vector<SerrinTerm> terms;
  double log_z;
  double log_bound;
};

struct SerrinReport {
  double p = 0.0;
  std::size_t trials = 0;
  std::size_t near_boundary_trials = 0;
  /// Trials where the bound is attained (N = 1 cases, up to rounding).
  std::size_t equality_cases = 0;
  /// max over trials of log z - log bound (<= 0 when the inequality holds).
  double max_log_gap = 0.0;
  std::vector<SerrinViolation> violations;
};

/// At least 10^4 random instances with N in 1..5, a_i log-uniform in [1e-6, 1e6] and q_i
/// uniform in [0, p); every tenth trial pushes all q_i to within 1e-6 of p.
/// z sits on the constraint boundary.
SerrinReport check_serrin(double p, std::size_t n_trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Iteration lemma for nondecreasing phi on [0, R0] with
// phi(r) <= C1 [(r/R)^alpha + mu] phi(R) + C2 R^beta.

enum class PhiHypothesis {
  /// The inequality above, checked on all grid pairs r <= R.
  original,
  /// The one-step recursion phi(theta R) <= theta^delta phi(R) + C2 R^beta
  /// the construction reduces the hypothesis to, checked for every grid R.
  one_step,
};

struct IterationInstance {
  double C1 = 1.0;
  double alpha = 1.0;
  double beta = 0.5;
  double C2 = 0.0;
  double mu = 0.0;
  double sigma = 0.5;
  double R0 = 1.0;
  std::function<double(double)> phi;
  PhiHypothesis hypothesis = PhiHypothesis::original;
};

struct IterationResult {
  double theta = 0.0;
  double delta_exp = 0.0;
  double mu0 = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
  bool hypothesis_ok = false;
  bool pass = false;
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  /// max phi(r) / (C3 (r/R)^sigma (phi(R) + C2 R^sigma)) over the grid
  double max_scaled_ratio = 0.0;
  /// max phi(r) / (C4 r^sigma) over the grid
  double max_global_ratio = 0.0;
};

/// Constants of the construction: delta = (alpha+beta)/2, theta solving
/// 2 C1 theta^alpha = theta^delta (C1 raised to 1 when smaller, which keeps
/// the hypothesis valid and theta < 1), mu0 = theta^alpha / 2 and
///   C3 = theta^-beta / (theta^beta - theta^delta) * max(1, R0^(beta-sigma)),
///   C4 = C3 R0^-sigma (phi(R0) + C2 R0^sigma).
/// Throws DomainError for beta >= alpha or sigma > beta and HypothesisError
/// for mu >= mu0.
IterationResult iterate_phi(const IterationInstance& inst, int grid_points = 120);

/// Extremal phi: phi(R0) = 1, linear on [theta R0, R0] down to
/// theta^delta + C2 R0^beta, and extended below by the one-step recursion
/// taken as an equality. Requires C2 R0^beta <= 1 - theta^delta.
IterationInstance extremal_instance(double C1, double alpha, double beta, double C2, double sigma, double R0);

struct IterationSuiteReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double max_scaled_ratio = 0.0;
  double max_global_ratio = 0.0;
  std::vector<std::size_t> failed_trials;
};

/// Random extremal instances with beta < alpha.
IterationSuiteReport check_iteration(std::size_t n_trials, std::uint64_t seed);

} // namespace otl
