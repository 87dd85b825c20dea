#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace otl {

enum class ModelKind { power, power_log };

/// Piecewise Chebyshev fit of G(t)/t^p in log t, built once per power-log
/// model.
struct PowerLogTable;

/// The nonlinearity g of the flux g(|xi|)/|xi| xi together with the
/// structural constants claimed for it.
///
/// power:      g(t) = t^(p-1)
/// power_log:  g(t) = t^(p-1) ln(a+t)^alpha_log
struct Nonlinearity {
  ModelKind kind = ModelKind::power;
  double p = 3.0;
  double a = 2.0;
  double alpha_log = 1.0;
  double g0 = 2.0;
  double g1 = 2.0;
  double C_mono = 0.5;
  /// Set by the power_log factory; eval_G falls back to direct quadrature
  /// without it.
  std::shared_ptr<const PowerLogTable> G_table;

  static Nonlinearity power(double p);
  static Nonlinearity power_log(double p, double a, double alpha_log);

  /// Throws DomainError when p, a, alpha_log or g0/g1 break their ranges.
  void check() const;
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

double eval_g(const Nonlinearity& nl, double t);
/// g'(t), closed form for both families.
double eval_dg(const Nonlinearity& nl, double t);
/// G(t) = integral of g over [0, t].
double eval_G(const Nonlinearity& nl, double t);
/// G(t) by adaptive Gauss-Kronrod, bypassing the table.
double eval_G_quadrature(const Nonlinearity& nl, double t);
/// G(t + dt) - G(t) with dt supplied directly, so the result keeps full
/// relative precision when dt is tiny compared to t.
double eval_G_increment(const Nonlinearity& nl, double t, double dt);
/// t g'(t) / g(t), computed in a form that does not overflow for large t.
double elasticity(const Nonlinearity& nl, double t);

struct EllipticityReport {
  double g0_hat = 0.0;
  double g1_hat = 0.0;
  bool pass = false;
};

/// 10^4 log-spaced points in [1e-8, 1e8].
std::vector<double> default_ellipticity_grid();

EllipticityReport validate_ellipticity(const Nonlinearity& nl, std::span<const double> t_grid);
EllipticityReport validate_ellipticity(const Nonlinearity& nl);

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

/// g(|xi|)/|xi| xi, extended by 0 at the origin.
template <int D>
Vec<D> flux(const Nonlinearity& nl, const Vec<D>& xi) {
  const double n = xi.norm();
  if (n == 0.0) return Vec<D>::Zero();
  return (eval_g(nl, n) / n) * xi;
}

double flux_delta_factor(const Nonlinearity& nl, double m);
void check_delta(double delta);

/// g(m)/m xi with m = sqrt(|xi|^2 + delta^2).
template <int D>
Vec<D> flux_delta(const Nonlinearity& nl, const Vec<D>& xi, double delta) {
  check_delta(delta);
  const double m = std::sqrt(xi.squaredNorm() + delta * delta);
  return flux_delta_factor(nl, m) * xi;
}

/// Exact derivative of flux_delta:
/// (g(m)/m) I + (g'(m) m - g(m)) / m^3 xi xi^T.
template <int D>
Mat<D> flux_delta_jacobian(const Nonlinearity& nl, const Vec<D>& xi, double delta) {
  check_delta(delta);
  const double m = std::sqrt(xi.squaredNorm() + delta * delta);
  const double phi = flux_delta_factor(nl, m);
  const double rank_one = (eval_dg(nl, m) * m - eval_g(nl, m)) / (m * m * m);
  Mat<D> J;
  for (int i = 0; i < D; ++i) {
    J(i, i) = phi + rank_one * xi[i] * xi[i];
    for (int j = 0; j < i; ++j) J(i, j) = J(j, i) = rank_one * xi[i] * xi[j];
  }
  return J;
}

struct MonotonicityEstimate {
  double C_hat = 0.0;
  Eigen::Vector2d xi = Eigen::Vector2d::Zero();
  Eigen::Vector2d zeta = Eigen::Vector2d::Zero();
  std::size_t n_samples = 0;
};

/// Smallest sampled value of (flux(xi)-flux(zeta)).(xi-zeta) / |xi-zeta|^p
/// over planar pairs with log-uniform magnitudes in [1e-4, 1e4] and uniform
/// directions. Throws ModelError when the minimum is not above 1e-12.
MonotonicityEstimate estimate_monotonicity_constant(const Nonlinearity& nl, double p,
                                                    std::size_t n_samples, std::uint64_t seed);

} // namespace otl
