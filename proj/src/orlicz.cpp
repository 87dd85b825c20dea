#include "otl/orlicz.hpp"

#include "otl/error.hpp"
#include "otl/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace otl {

struct PowerLogTable {
  static constexpr int kIntervals = 48;
  static constexpr int kDegree = 16;
  static constexpr double kLogLo = -18.420680743952367; // ln 1e-8
  static constexpr double kLogHi = 18.420680743952367;
  std::vector<std::array<double, kDegree>> coeffs;
  double h0 = 0.0; ///< H(0) = ln(a)^alpha / p
  double h1 = 0.0; ///< H'(0)

  double eval(double t) const {
    const double u = std::log(t);
    const double width = (kLogHi - kLogLo) / kIntervals;
    const int k = std::clamp(static_cast<int>((u - kLogLo) / width), 0, kIntervals - 1);
    const double lo = kLogLo + k * width;
    const double x = 2.0 * (u - lo) / width - 1.0;
    // Clenshaw recurrence.
    const auto& c = coeffs[static_cast<std::size_t>(k)];
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = kDegree - 1; j >= 1; --j) {
      const double b0 = 2.0 * x * b1 - b2 + c[static_cast<std::size_t>(j)];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c[0];
  }
};

namespace {

/// H(t) = int_0^1 x^(p-1) ln(a + t x)^alpha dx, so that G(t) = t^p H(t).
/// Composite 20-point Gauss on the dyadic pieces [2^-(k+1), 2^-k]: both the
/// branch point of x^(p-1) at 0 and the log singularity at -a/t lie at
/// least three half-lengths from every piece, so each piece is resolved to
/// rounding. Pieces below 2^-K carry less than 2^-Kp < 1e-18 of the mass.
double power_log_H(const Nonlinearity& nl, double t) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const auto f = [&](double s) { return std::pow(s, nl.p - 1.0) * std::pow(std::log(nl.a + t * s), nl.alpha_log); };
  const int K = static_cast<int>(std::ceil(60.0 / nl.p)) + 1;
  double total = 0.0;
  double hi = 1.0;
  for (int k = 0; k < K; ++k) {
    const double lo = 0.5 * hi;
    const double half = 0.5 * (hi - lo);
    const double mid = lo + half;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += w[i] * (x[i] == 0.0 ? f(mid) : f(mid - half * x[i]) + f(mid + half * x[i]));
    }
    total += half * sum;
    hi = lo;
  }
  return total;
}

std::shared_ptr<const PowerLogTable> build_table(const Nonlinearity& nl) {
  using T = PowerLogTable;
  auto table = std::make_shared<T>();
  constexpr int n = T::kDegree;
  const double width = (T::kLogHi - T::kLogLo) / T::kIntervals;
  table->coeffs.resize(T::kIntervals);
  std::array<double, n> node;
  std::array<double, n> fval;
  for (int k = 0; k < n; ++k) node[static_cast<std::size_t>(k)] = std::cos(std::numbers::pi * (k + 0.5) / n);
  for (int i = 0; i < T::kIntervals; ++i) {
    const double lo = T::kLogLo + i * width;
    for (int k = 0; k < n; ++k) {
      const double u = lo + 0.5 * width * (node[static_cast<std::size_t>(k)] + 1.0);
      fval[static_cast<std::size_t>(k)] = power_log_H(nl, std::exp(u));
    }
    auto& c = table->coeffs[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += fval[static_cast<std::size_t>(k)] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
      c[static_cast<std::size_t>(j)] = (j == 0 ? 1.0 : 2.0) * sum / n;
    }
  }
  const double L = std::log(nl.a);
  table->h0 = std::pow(L, nl.alpha_log) / nl.p;
  table->h1 = nl.alpha_log * std::pow(L, nl.alpha_log - 1.0) / (nl.a * (nl.p + 1.0));
  return table;
}

} // namespace

Nonlinearity Nonlinearity::power(double p) {
  Nonlinearity nl;
  nl.kind = ModelKind::power;
  nl.p = p;
  nl.g0 = p - 1.0;
  nl.g1 = p - 1.0;
  nl.C_mono = std::pow(2.0, 2.0 - p);
  nl.check();
  return nl;
}

Nonlinearity Nonlinearity::power_log(double p, double a, double alpha_log) {
  Nonlinearity nl;
  nl.kind = ModelKind::power_log;
  nl.p = p;
  nl.a = a;
  nl.alpha_log = alpha_log;
  // alpha t / ((a+t) ln(a+t)) < alpha / ln(a) for every t > 0.
  nl.g0 = p - 1.0;
  nl.g1 = p - 1.0 + alpha_log / std::log(a);
  nl.check();
  nl.C_mono = std::pow(2.0, 2.0 - p) * std::min(1.0, std::pow(std::log(a), alpha_log));
  nl.G_table = build_table(nl);
  return nl;
}

void Nonlinearity::check() const {
  if (!(p > 2.0)) throw DomainError("model.p must exceed 2");
  if (kind == ModelKind::power_log) {
    if (!(a > 1.0)) throw DomainError("model.a must exceed 1");
    if (!(alpha_log > 0.0)) throw DomainError("model.alpha_log must be positive");
  }
  if (!(g0 >= 1.0 && g0 <= g1)) throw DomainError("model.g0/g1 must satisfy 1 <= g0 <= g1");
  if (!(C_mono > 0.0)) throw DomainError("model.C_mono must be positive");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::power ? "power" : "power-log";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "power") return ModelKind::power;
  if (s == "power-log" || s == "power_log") return ModelKind::power_log;
  throw DomainError("unknown model kind '" + s + "'");
}

namespace {

void check_nonnegative(double t) {
  if (!(t >= 0.0)) throw DomainError("nonlinearity evaluated at negative argument");
}

double log_factor(const Nonlinearity& nl, double t) {
  return std::pow(std::log(nl.a + t), nl.alpha_log);
}

} // namespace

double eval_g(const Nonlinearity& nl, double t) {
  check_nonnegative(t);
  if (t == 0.0) return 0.0;
  const double base = std::pow(t, nl.p - 1.0);
  return nl.kind == ModelKind::power ? base : base * log_factor(nl, t);
}

double eval_dg(const Nonlinearity& nl, double t) {
  check_nonnegative(t);
  if (t == 0.0) {
    // p > 2, so g'(0) = 0 for both families.
    return 0.0;
  }
  const double lead = (nl.p - 1.0) * std::pow(t, nl.p - 2.0);
  if (nl.kind == ModelKind::power) return lead;
  const double L = std::log(nl.a + t);
  return lead * std::pow(L, nl.alpha_log) +
         std::pow(t, nl.p - 1.0) * nl.alpha_log * std::pow(L, nl.alpha_log - 1.0) / (nl.a + t);
}

double elasticity(const Nonlinearity& nl, double t) {
  if (!(t > 0.0)) throw DomainError("elasticity requires t > 0");
  if (nl.kind == ModelKind::power) return nl.p - 1.0;
  return (nl.p - 1.0) + nl.alpha_log * t / ((nl.a + t) * std::log(nl.a + t));
}

double eval_G_quadrature(const Nonlinearity& nl, double t) {
  check_nonnegative(t);
  if (t == 0.0) return 0.0;
  if (nl.kind == ModelKind::power) return std::pow(t, nl.p) / nl.p;
  return std::pow(t, nl.p) * power_log_H(nl, t);
}

double eval_G(const Nonlinearity& nl, double t) {
  check_nonnegative(t);
  if (t == 0.0) return 0.0;
  if (nl.kind == ModelKind::power) return std::pow(t, nl.p) / nl.p;
  const auto* table = nl.G_table.get();
  if (table == nullptr || t > 1e8) return eval_G_quadrature(nl, t);
  if (t >= 1e-8) return std::pow(t, nl.p) * table->eval(t);
  // First-order Taylor term; the remainder is O((t / (a ln a))^2).
  if (t < 1e-8 * nl.a * std::log(nl.a)) return std::pow(t, nl.p) * (table->h0 + table->h1 * t);
  return eval_G_quadrature(nl, t);
}

double eval_G_increment(const Nonlinearity& nl, double t, double dt) {
  check_nonnegative(t);
  check_nonnegative(t + dt);
  if (dt == 0.0) return 0.0;
  if (t == 0.0) return eval_G(nl, dt);
  const double rel = dt / t;
  if (nl.kind == ModelKind::power) {
    // t^p ((1 + rel)^p - 1) / p
    return std::pow(t, nl.p) * std::expm1(nl.p * std::log1p(rel)) / nl.p;
  }
  if (std::abs(rel) > 1e-2) return eval_G(nl, t + dt) - eval_G(nl, t);
  // Short interval away from the origin: g is analytic there and a
  // fixed Gauss rule is exact to rounding.
  // The half-length dt/2 scales the rule directly; forming t + dt as an
  // endpoint would round away the low bits of dt.
  using rule = boost::math::quadrature::gauss<double, 10>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double half = 0.5 * dt;
  const double mid = t + half;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double off = half * x[i];
    sum += w[i] * (x[i] == 0.0 ? eval_g(nl, mid) : eval_g(nl, mid - off) + eval_g(nl, mid + off));
  }
  return half * sum;
}

std::vector<double> default_ellipticity_grid() {
  constexpr std::size_t n = 10000;
  std::vector<double> grid(n);
  const double lo = std::log(1e-8);
  const double hi = std::log(1e8);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return grid;
}

EllipticityReport validate_ellipticity(const Nonlinearity& nl, std::span<const double> t_grid) {
  if (t_grid.empty()) throw DomainError("ellipticity grid is empty");
  EllipticityReport rep;
  rep.g0_hat = std::numeric_limits<double>::infinity();
  rep.g1_hat = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("ellipticity grid must be strictly positive");
    const double ratio = elasticity(nl, t);
    rep.g0_hat = std::min(rep.g0_hat, ratio);
    rep.g1_hat = std::max(rep.g1_hat, ratio);
  }
  rep.pass = nl.g0 - 1e-9 <= rep.g0_hat && rep.g1_hat <= nl.g1 + 1e-9;
  return rep;
}

EllipticityReport validate_ellipticity(const Nonlinearity& nl) {
  const auto grid = default_ellipticity_grid();
  return validate_ellipticity(nl, grid);
}

void check_delta(double delta) {
  if (!(delta > 0.0)) throw DomainError("regularization delta must be positive");
}

double flux_delta_factor(const Nonlinearity& nl, double m) { return eval_g(nl, m) / m; }

MonotonicityEstimate estimate_monotonicity_constant(const Nonlinearity& nl, double p,
                                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw DomainError("monotonicity estimate needs at least 1e4 samples");
  Rng rng(seed);
  MonotonicityEstimate est;
  est.C_hat = std::numeric_limits<double>::infinity();
  est.n_samples = n_samples;
  const auto sample = [&] {
    const double mag = rng.log_uniform(1e-4, 1e4);
    const double th = rng.angle();
    return Eigen::Vector2d(mag * std::cos(th), mag * std::sin(th));
  };
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Eigen::Vector2d xi = sample();
    const Eigen::Vector2d zeta = sample();
    const Eigen::Vector2d diff = xi - zeta;
    const double dn = diff.norm();
    if (dn == 0.0) continue;
    const double ratio = (flux<2>(nl, xi) - flux<2>(nl, zeta)).dot(diff) / std::pow(dn, p);
    if (ratio < est.C_hat) {
      est.C_hat = ratio;
      est.xi = xi;
      est.zeta = zeta;
    }
  }
  if (!(est.C_hat > 1e-12)) {
    throw ModelError("monotonicity constant estimate is not positive");
  }
  return est;
}

} // namespace otl
