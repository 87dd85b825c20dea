#pragma once

#include "otl/fem.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace otl {

/// Ball-average regularity functionals of a P1 field. Every ball integral
/// runs over the triangles whose barycenter lies in the ball.

/// r^-2 sum_{T in patch} |T| |Du_T - mean|, mean the area-weighted patch
/// gradient. Throws QueryError when the ball leaves Omega or r < 4h.
double mean_oscillation_gradient(const DiscreteField& u, const Point& x0, double r);

/// Same quantity with an arbitrary vector subtracted instead of the mean.
double oscillation_about(const DiscreteField& u, const Point& x0, double r, const Eigen::Vector2d& c);

/// max - min of the vertex values of the patch.
double oscillation(const DiscreteField& u, const Point& x0, double r);

struct Center {
  Point x;
  bool on_interface = false;
};

/// Table indexed [center][radius].
using ScaleTable = std::vector<std::vector<double>>;

ScaleTable bmo_table(const DiscreteField& u, const std::vector<Center>& centers, const std::vector<double>& radii);
ScaleTable oscillation_modulus(const DiscreteField& u, const std::vector<Center>& centers,
                               const std::vector<double>& radii);

/// max over the table of osc / (r (1 + |log r|)).
double fit_log_lip(const ScaleTable& osc, const std::vector<double>& radii);

/// Least-squares slope of log osc against log r pooled over the centers
/// flagged on the interface (cells with osc = 0 skipped). Empty when fewer
/// than two usable cells remain.
std::optional<double> holder_exponent(const ScaleTable& osc, const std::vector<Center>& centers,
                                      const std::vector<double>& radii);
/// Same fit over every center.
std::optional<double> holder_exponent(const ScaleTable& osc, const std::vector<double>& radii);

/// 1 - d/(p + eps (p-1)). Requires 2 < p < d and
/// (d-p)/(p-1) < eps < d - p/(p-1); throws HypothesisError otherwise.
double exponent_formula(int d, double p, double eps);

struct LocalBoundedness {
  double r_sup = 0.0;
  double r_grad = 0.0;
};

/// r_sup  = |u|_{inf, B_{R/2}} / [R^{-d/p} (|u|_{p, B_R} + R^{d/p+1} f_sup)]
/// r_grad = |Du|_{p, B_{R/2}} / [R^{-1}   (|u|_{p, B_R} + R^{d/p+1} f_sup)]
/// with d = 2. A zero numerator gives 0.
LocalBoundedness local_boundedness_ratio(const DiscreteField& u, double p, double f_sup, const Point& x0,
                                         double R);

/// sup over (center, rho) of rho^-lambda sum |T| |v_T - mean|^p and of
/// rho^-lambda sum |T| |v_T|^p for a per-triangle vector field v.
double campanato_seminorm(const Mesh& mesh, const std::vector<Eigen::Vector2d>& field, double p, double lambda,
                          const std::vector<Center>& centers, const std::vector<double>& radii);
double morrey_norm(const Mesh& mesh, const std::vector<Eigen::Vector2d>& field, double p, double lambda,
                   const std::vector<Center>& centers, const std::vector<double>& radii);

/// Per-triangle gradients of u.
std::vector<Eigen::Vector2d> gradient_field(const DiscreteField& u);

struct LbEntry {
  Point center;
  double R;
  LocalBoundedness ratio;
};

struct RegularityReport {
  std::vector<Center> centers;
  std::vector<double> radii; ///< strictly decreasing
  ScaleTable bmo;
  ScaleTable osc;
  double bmo_sup = 0.0;
  std::optional<double> alpha_hat;
  /// Why alpha_hat carries no guarantee (empty when it does).
  std::string alpha_hat_note;
  double loglip_C = 0.0;
  std::vector<LbEntry> lb_ratios;
  double campanato = 0.0;
  double morrey = 0.0;
  double lambda = 2.0;
  double p = 0.0;
  std::string config_hash;
};

/// bmo and osc tables, fitted constants, and the Campanato/Morrey values of
/// Du with exponent p and lambda = 2. Local-boundedness ratios are filled
/// for every (center, radius) when f_sup is given.
RegularityReport regularity_report(const DiscreteField& u, double p, std::optional<double> f_sup,
                                   const std::vector<Center>& centers, const std::vector<double>& radii);

void write_report_json(const RegularityReport& rep, const std::filesystem::path& path);
/// center_x,center_y,r,bmo,osc
void write_metrics_csv(const RegularityReport& rep, const std::filesystem::path& path);

} // namespace otl
