#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace otl {

/// Radial solution of the transmission problem on B_R in R^d with
/// circle/sphere interface of radius rho, constant data f and g(t) = t^(p-1).
///
///   u(r) = u_inner                 for r <= rho
///   u(r) = A (r^kappa - R^kappa)   for rho <= r <= R,  kappa = (p-d)/(p-1)
///
/// The outer slope at the interface is fixed by the weak form (flux through
/// Gamma equals f with the normal pointing into the inner region):
/// u'(rho+) = -f^(1/(p-1)).
struct RadialSolution {
  int d = 2;
  double p = 3.0;
  double rho = 0.5;
  double R = 1.0;
  double f_const = 1.0;
  double kappa = 0.0;
  double A = 0.0;
  double u_inner = 0.0;

  double u(double r) const;
  /// Radial derivative; 0 inside, one-sided outer value at r = rho.
  double du(double r) const;
  /// r^(d-1) |u'|^(p-2) u' on the outer shell (constant there).
  double radial_flux(double r) const;
};

/// Throws DomainError for p <= 2, p == d, rho outside (0, R) or f <= 0.
RadialSolution radial_solution(int d, double p, double rho, double R, double f_const);

struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  double u_inner() const { return u.front(); }
};

/// Numerical radial profile on a uniform grid over [rho, R], obtained from
/// the conserved flux r^(d-1)|u'|^(p-2)u' = -rho^(d-1) f by scalar root
/// solves for u' and Gauss integration inward from u(R) = 0. Independent of
/// the closed form.
RadialProfile shoot_radial(int d, double p, double rho, double R, double f_const, int n_grid);

/// oracle_profile.csv with columns r,u,du sampled on [0, R].
void write_oracle_profile(const RadialSolution& sol, int n, const std::filesystem::path& path,
                          const std::string& hash);

} // namespace otl
