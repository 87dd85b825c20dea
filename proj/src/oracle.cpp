#include "otl/oracle.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>

namespace otl {

double RadialSolution::u(double r) const {
  if (r <= rho) return u_inner;
  // Adding +0.0 turns the -0 at r = R into +0.
  return A * (std::pow(r, kappa) - std::pow(R, kappa)) + 0.0;
}

double RadialSolution::du(double r) const {
  if (r < rho) return 0.0;
  return A * kappa * std::pow(r, kappa - 1.0);
}

double RadialSolution::radial_flux(double r) const {
  const double s = du(r);
  return std::pow(r, d - 1) * std::pow(std::abs(s), p - 2.0) * s;
}

RadialSolution radial_solution(int d, double p, double rho, double R, double f_const) {
  if (d < 2) throw DomainError("dimension must be at least 2");
  if (!(p > 2.0)) throw DomainError("p must exceed 2");
  if (p == static_cast<double>(d)) throw DomainError("p == d needs the logarithmic profile, which is unsupported");
  if (!(rho > 0.0 && rho < R)) throw DomainError("radii must satisfy 0 < rho < R");
  if (!(f_const > 0.0)) throw DomainError("interface datum must be positive");
  RadialSolution sol;
  sol.d = d;
  sol.p = p;
  sol.rho = rho;
  sol.R = R;
  sol.f_const = f_const;
  sol.kappa = (p - d) / (p - 1.0);
  const double slope = std::pow(f_const, 1.0 / (p - 1.0));
  sol.A = -slope * std::pow(rho, 1.0 - sol.kappa) / sol.kappa;
  sol.u_inner = sol.A * (std::pow(rho, sol.kappa) - std::pow(R, sol.kappa));
  return sol;
}

namespace {

/// Solves |s|^(p-2) s = target for s.
double invert_flux(double p, double target) {
  if (target == 0.0) return 0.0;
  const double sign = target < 0.0 ? -1.0 : 1.0;
  const double mag = std::abs(target);
  const auto psi = [&](double s) { return std::pow(s, p - 1.0) - mag; };
  double hi = 1.0;
  for (int k = 0; psi(hi) < 0.0; ++k) {
    if (k > 2000) throw Error("radial shooting: root bracket not found");
    hi *= 2.0;
  }
  std::uintmax_t max_iter = 200;
  const auto [lo_root, hi_root] =
      boost::math::tools::toms748_solve(psi, 0.0, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  if (max_iter >= 200) throw Error("radial shooting: scalar root solve did not converge");
  return sign * 0.5 * (lo_root + hi_root);
}

} // namespace

RadialProfile shoot_radial(int d, double p, double rho, double R, double f_const, int n_grid) {
  if (n_grid < 1000) throw DomainError("shooting grid needs at least 1000 points");
  if (!(p > 1.0 && rho > 0.0 && rho < R)) throw DomainError("invalid radial problem");
  // Flux through the interface: -|u'(rho)|^(p-2) u'(rho) = f.
  const double conserved = -std::pow(rho, d - 1) * f_const;
  const auto slope = [&](double r) { return invert_flux(p, conserved / std::pow(r, d - 1)); };

  RadialProfile prof;
  const auto n = static_cast<std::size_t>(n_grid);
  prof.r.resize(n);
  prof.u.resize(n);
  prof.du.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    prof.r[i] = i + 1 == n ? R : rho + (R - rho) * static_cast<double>(i) / static_cast<double>(n - 1);
    prof.du[i] = slope(prof.r[i]);
  }
  prof.u[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double cell = boost::math::quadrature::gauss<double, 7>::integrate(slope, prof.r[i], prof.r[i + 1]);
    prof.u[i] = prof.u[i + 1] - cell;
  }
  return prof;
}

void write_oracle_profile(const RadialSolution& sol, int n, const std::filesystem::path& path,
                          const std::string& hash) {
  auto out = open_output(path);
  if (!hash.empty()) out << "# config_hash=" << hash << '\n';
  out << "r,u,du\n";
  for (int i = 0; i < n; ++i) {
    const double r = i + 1 == n ? sol.R : sol.R * i / (n - 1);
    out << format_double(r) << ',' << format_double(sol.u(r)) << ',' << format_double(sol.du(r)) << '\n';
  }
}

} // namespace otl
