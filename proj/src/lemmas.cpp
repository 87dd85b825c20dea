#include "otl/lemmas.hpp"

#include "otl/error.hpp"
#include "otl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otl {

namespace {

void check_terms(double p, std::span<const SerrinTerm> terms) {
  if (!(p > 0.0)) throw DomainError("p must be positive");
  if (terms.empty()) throw DomainError("at least one term is required");
  for (const auto& t : terms) {
    if (!(t.a > 0.0 && std::isfinite(t.a))) throw DomainError("coefficients a_i must be positive and finite");
    if (!(t.q >= 0.0 && t.q < p)) throw DomainError("exponents q_i must lie in [0, p)");
  }
}

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double gamma_of(double p, const SerrinTerm& t) { return 1.0 / (p - t.q); }

} // namespace

double serrin_log_bound(double p, std::span<const SerrinTerm> terms) {
  check_terms(p, terms);
  double gamma_max = 0.0;
  std::vector<double> logs;
  logs.reserve(terms.size());
  for (const auto& t : terms) {
    const double g = gamma_of(p, t);
    gamma_max = std::max(gamma_max, g);
    logs.push_back(g * std::log(t.a));
  }
  return gamma_max * std::log(static_cast<double>(terms.size())) + log_sum_exp(logs);
}

double serrin_bound(double p, std::span<const SerrinTerm> terms) { return std::exp(serrin_log_bound(p, terms)); }

double serrin_constraint_log_root(double p, std::span<const SerrinTerm> terms) {
  check_terms(p, terms);
  // With y = log z the constraint reads logsumexp(log a_i + (q_i - p) y) = 0,
  // strictly decreasing in y.
  std::vector<double> logs(terms.size());
  const auto excess = [&](double y) {
    for (std::size_t i = 0; i < terms.size(); ++i) logs[i] = std::log(terms[i].a) + (terms[i].q - p) * y;
    return log_sum_exp(logs);
  };
  // Each term alone is 1 at y_i = gamma_i log a_i, and at most 1/N at
  // y_i + gamma_i log N.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const double log_n = std::log(static_cast<double>(terms.size()));
  for (const auto& t : terms) {
    const double g = gamma_of(p, t);
    lo = std::max(lo, g * std::log(t.a));
    hi = std::max(hi, g * (std::log(t.a) + log_n));
  }
  if (hi == lo) return lo;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SerrinReport check_serrin(double p, std::size_t n_trials, std::uint64_t seed) {
  if (!(p > 0.0)) throw DomainError("p must be positive");
  if (n_trials < 10000) throw DomainError("check_serrin needs at least 10^4 trials");
  Rng rng(seed);
  SerrinReport rep;
  rep.p = p;
  rep.trials = n_trials;
  rep.max_log_gap = -std::numeric_limits<double>::infinity();
  std::vector<SerrinTerm> terms;
  for (std::size_t k = 0; k < n_trials; ++k) {
    const int n = rng.integer(1, 5);
    const bool near_boundary = k % 10 == 9;
    if (near_boundary) ++rep.near_boundary_trials;
    terms.clear();
    for (int i = 0; i < n; ++i) {
      const double a = rng.log_uniform(1e-6, 1e6);
      double q = near_boundary ? p - 1e-6 * rng.uniform(0.01, 1.0) : rng.uniform(0.0, p);
      q = std::min(q, std::nextafter(p, 0.0));
      terms.push_back({a, q});
    }
    const double log_z = serrin_constraint_log_root(p, terms);
    const double log_b = serrin_log_bound(p, terms);
    const double tol = 1e-12 * std::max(1.0, std::abs(log_b));
    rep.max_log_gap = std::max(rep.max_log_gap, log_z - log_b);
    if (std::abs(log_z - log_b) <= tol) ++rep.equality_cases;
    if (log_z > log_b + tol) rep.violations.push_back({terms, log_z, log_b});
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

struct Construction {
  double theta;
  double delta;
  double mu0;
  double C3;
};

Construction construct(double C1, double alpha, double beta, double sigma, double R0) {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("alpha and beta must be positive");
  if (!(beta < alpha)) throw DomainError("iteration lemma requires beta < alpha");
  if (!(sigma <= beta)) throw DomainError("iteration lemma requires sigma <= beta");
  if (!(C1 > 0.0 && R0 > 0.0)) throw DomainError("C1 and R0 must be positive");
  Construction c{};
  c.delta = 0.5 * (alpha + beta);
  const double c1 = std::max(C1, 1.0);
  c.theta = std::pow(2.0 * c1, -1.0 / (alpha - c.delta));
  c.mu0 = 0.5 * std::pow(c.theta, alpha);
  c.C3 = std::pow(c.theta, -beta) / (std::pow(c.theta, beta) - std::pow(c.theta, c.delta)) *
         std::max(1.0, std::pow(R0, beta - sigma));
  return c;
}

} // namespace

IterationResult iterate_phi(const IterationInstance& inst, int grid_points) {
  if (!inst.phi) throw DomainError("phi is not set");
  if (!(inst.C2 >= 0.0 && inst.mu >= 0.0)) throw DomainError("C2 and mu must be nonnegative");
  const Construction c = construct(inst.C1, inst.alpha, inst.beta, inst.sigma, inst.R0);
  if (!(inst.mu < c.mu0)) throw HypothesisError("mu must be below mu0 = theta^alpha / 2");

  IterationResult res;
  res.theta = c.theta;
  res.delta_exp = c.delta;
  res.mu0 = c.mu0;
  res.C3 = c.C3;
  const double phi_R0 = inst.phi(inst.R0);
  res.C4 = c.C3 * std::pow(inst.R0, -inst.sigma) * (phi_R0 + inst.C2 * std::pow(inst.R0, inst.sigma));

  // Log-spaced radii plus the discrete scales theta^k R0 and points just
  // below them, where step-like phi are worst.
  std::vector<double> radii;
  const double r_min = 1e-6 * inst.R0;
  for (int i = 0; i < grid_points; ++i) {
    radii.push_back(inst.R0 * std::pow(r_min / inst.R0, static_cast<double>(i) / (grid_points - 1)));
  }
  for (double s = inst.R0; s >= r_min && radii.size() < 20u * static_cast<std::size_t>(grid_points); s *= c.theta) {
    radii.push_back(s);
    radii.push_back(s * (1.0 - 1e-9));
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::vector<double> phi(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) phi[i] = inst.phi(radii[i]);

  const double rel = 1e-12;
  res.hypothesis_ok = true;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (j > 0 && phi[j] < phi[j - 1] * (1.0 - rel)) res.hypothesis_ok = false;
    const double R = radii[j];
    if (inst.hypothesis == PhiHypothesis::one_step) {
      const double rhs = std::pow(c.theta, c.delta) * phi[j] + inst.C2 * std::pow(R, inst.beta);
      if (inst.phi(c.theta * R) > rhs * (1.0 + rel)) res.hypothesis_ok = false;
    }
    for (std::size_t i = 0; i <= j; ++i) {
      const double r = radii[i];
      if (inst.hypothesis == PhiHypothesis::original) {
        const double rhs = inst.C1 * (std::pow(r / R, inst.alpha) + inst.mu) * phi[j] + inst.C2 * std::pow(R, inst.beta);
        if (phi[i] > rhs * (1.0 + rel)) res.hypothesis_ok = false;
      }
      const double scaled = c.C3 * std::pow(r / R, inst.sigma) * (phi[j] + inst.C2 * std::pow(R, inst.sigma));
      ++res.pairs_checked;
      if (phi[i] > 0.0) res.max_scaled_ratio = std::max(res.max_scaled_ratio, phi[i] / scaled);
      if (phi[i] > scaled * (1.0 + rel)) ++res.violations;
    }
    const double global = res.C4 * std::pow(R, inst.sigma);
    if (phi[j] > 0.0) res.max_global_ratio = std::max(res.max_global_ratio, phi[j] / global);
    if (phi[j] > global * (1.0 + rel)) ++res.violations;
  }
  res.pass = res.hypothesis_ok && res.violations == 0;
  return res;
}

IterationInstance extremal_instance(double C1, double alpha, double beta, double C2, double sigma, double R0) {
  const Construction c = construct(C1, alpha, beta, sigma, R0);
  const double theta = c.theta;
  const double td = std::pow(theta, c.delta);
  const double bottom = td + C2 * std::pow(R0, beta);
  if (!(bottom <= 1.0)) throw DomainError("extremal phi needs C2 R0^beta <= 1 - theta^delta");
  IterationInstance inst;
  inst.C1 = C1;
  inst.alpha = alpha;
  inst.beta = beta;
  inst.C2 = C2;
  inst.mu = 0.0;
  inst.sigma = sigma;
  inst.R0 = R0;
  inst.hypothesis = PhiHypothesis::one_step;
  const double lo = theta * R0;
  inst.phi = [=](double r) {
    if (r <= 0.0) return 0.0;
    r = std::min(r, R0);
    // r = theta^k s with s in [theta R0, R0]
    int k = 0;
    double s = r;
    while (s < lo && k < 100000) {
      s /= theta;
      ++k;
    }
    s = std::min(s, R0);
    double v = bottom + (1.0 - bottom) * (s - lo) / (R0 - lo);
    double scale = s;
    for (int j = 0; j < k; ++j) {
      v = td * v + C2 * std::pow(scale, beta);
      scale *= theta;
    }
    return v;
  };
  return inst;
}

IterationSuiteReport check_iteration(std::size_t n_trials, std::uint64_t seed) {
  Rng rng(seed);
  IterationSuiteReport rep;
  rep.trials = n_trials;
  for (std::size_t k = 0; k < n_trials; ++k) {
    const double alpha = rng.uniform(0.2, 3.0);
    const double beta = alpha * rng.uniform(0.05, 0.95);
    const double C1 = rng.uniform(1.0, 5.0);
    const double R0 = rng.log_uniform(0.1, 10.0);
    const double sigma = k % 4 == 0 ? beta : beta * rng.uniform(0.1, 1.0);
    const Construction c = construct(C1, alpha, beta, sigma, R0);
    const double room = 1.0 - std::pow(c.theta, c.delta);
    const double C2 = k % 5 == 0 ? 0.0 : rng.uniform(0.0, 1.0) * room / std::pow(R0, beta);
    const IterationResult res = iterate_phi(extremal_instance(C1, alpha, beta, C2, sigma, R0), 60);
    rep.max_scaled_ratio = std::max(rep.max_scaled_ratio, res.max_scaled_ratio);
    rep.max_global_ratio = std::max(rep.max_global_ratio, res.max_global_ratio);
    if (!res.pass) {
      ++rep.failures;
      rep.failed_trials.push_back(k);
    }
  }
  return rep;
}

} // namespace otl
