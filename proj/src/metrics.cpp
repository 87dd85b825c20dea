#include "otl/metrics.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace otl {

namespace {

constexpr int kDim = 2;

std::vector<std::size_t> admissible_patch(const Mesh& mesh, const Point& x0, double r) {
  if (r < 4.0 * mesh.h) {
    throw QueryError("radius " + format_double(r) + " is below 4h = " + format_double(4.0 * mesh.h));
  }
  return ball_patch(mesh, x0, r);
}

Eigen::Vector2d mean_of(const Mesh& mesh, const std::vector<Eigen::Vector2d>& v, const std::vector<std::size_t>& patch,
                        double* area_out = nullptr) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double area = 0.0;
  for (auto t : patch) {
    const double a = mesh.area(t);
    sum += a * v[t];
    area += a;
  }
  if (area_out) *area_out = area;
  return area > 0.0 ? Eigen::Vector2d(sum / area) : Eigen::Vector2d::Zero();
}

double deviation_integral(const Mesh& mesh, const DiscreteField& u, const std::vector<std::size_t>& patch,
                          const Eigen::Vector2d& c) {
  double s = 0.0;
  for (auto t : patch) s += mesh.area(t) * (u.gradient(t) - c).norm();
  return s;
}

} // namespace

std::vector<Eigen::Vector2d> gradient_field(const DiscreteField& u) {
  std::vector<Eigen::Vector2d> g(u.mesh().num_triangles());
  for (std::size_t t = 0; t < g.size(); ++t) g[t] = u.gradient(t);
  return g;
}

double oscillation_about(const DiscreteField& u, const Point& x0, double r, const Eigen::Vector2d& c) {
  const auto patch = admissible_patch(u.mesh(), x0, r);
  return deviation_integral(u.mesh(), u, patch, c) / std::pow(r, kDim);
}

double mean_oscillation_gradient(const DiscreteField& u, const Point& x0, double r) {
  const Mesh& mesh = u.mesh();
  const auto patch = admissible_patch(mesh, x0, r);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double area = 0.0;
  for (auto t : patch) {
    sum += mesh.area(t) * u.gradient(t);
    area += mesh.area(t);
  }
  if (area == 0.0) return 0.0;
  return deviation_integral(mesh, u, patch, sum / area) / std::pow(r, kDim);
}

double oscillation(const DiscreteField& u, const Point& x0, double r) {
  const auto patch = admissible_patch(u.mesh(), x0, r);
  if (patch.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto v : patch_vertices(u.mesh(), patch)) {
    lo = std::min(lo, u[v]);
    hi = std::max(hi, u[v]);
  }
  return hi - lo;
}

namespace {

template <class Fn>
ScaleTable tabulate(const std::vector<Center>& centers, const std::vector<double>& radii, Fn&& cell) {
  ScaleTable table(centers.size(), std::vector<double>(radii.size(), 0.0));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = 0; j < radii.size(); ++j) table[i][j] = cell(centers[i].x, radii[j]);
  }
  return table;
}

} // namespace

ScaleTable bmo_table(const DiscreteField& u, const std::vector<Center>& centers, const std::vector<double>& radii) {
  return tabulate(centers, radii, [&](const Point& x, double r) { return mean_oscillation_gradient(u, x, r); });
}

ScaleTable oscillation_modulus(const DiscreteField& u, const std::vector<Center>& centers,
                               const std::vector<double>& radii) {
  return tabulate(centers, radii, [&](const Point& x, double r) { return oscillation(u, x, r); });
}

double fit_log_lip(const ScaleTable& osc, const std::vector<double>& radii) {
  double c = 0.0;
  for (const auto& row : osc) {
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double r = radii[j];
      c = std::max(c, row[j] / (r * (1.0 + std::abs(std::log(r)))));
    }
  }
  return c;
}

namespace {

std::optional<double> pooled_slope(const ScaleTable& osc, const std::vector<double>& radii,
                                   const std::vector<bool>& use) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < osc.size(); ++i) {
    if (!use[i]) continue;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      if (!(osc[i][j] > 0.0)) continue;
      const double x = std::log(radii[j]);
      const double y = std::log(osc[i][j]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  if (n < 2) return std::nullopt;
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

} // namespace

std::optional<double> holder_exponent(const ScaleTable& osc, const std::vector<Center>& centers,
                                      const std::vector<double>& radii) {
  std::vector<bool> use(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) use[i] = centers[i].on_interface;
  return pooled_slope(osc, radii, use);
}

std::optional<double> holder_exponent(const ScaleTable& osc, const std::vector<double>& radii) {
  return pooled_slope(osc, radii, std::vector<bool>(osc.size(), true));
}

double exponent_formula(int d, double p, double eps) {
  if (!(p > 2.0 && p < d)) throw HypothesisError("exponent formula needs 2 < p < d");
  const double lo = (d - p) / (p - 1.0);
  const double hi = d - p / (p - 1.0);
  if (!(eps > lo && eps < hi)) {
    throw HypothesisError("eps must lie in (" + format_double(lo) + ", " + format_double(hi) + ")");
  }
  return 1.0 - d / (p + eps * (p - 1.0));
}

LocalBoundedness local_boundedness_ratio(const DiscreteField& u, double p, double f_sup, const Point& x0,
                                         double R) {
  if (!(p >= 1.0)) throw DomainError("p must be at least 1");
  if (!(f_sup >= 0.0)) throw DomainError("f_sup must be nonnegative");
  const Mesh& mesh = u.mesh();
  const auto outer = ball_patch(mesh, x0, R);
  const auto inner = ball_patch(mesh, x0, 0.5 * R);

  // |u|^p on each triangle by the edge-midpoint rule.
  double int_up = 0.0;
  for (auto t : outer) {
    const auto& v = mesh.triangles[t].v;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += std::pow(std::abs(0.5 * (u[v[k]] + u[v[(k + 1) % 3]])), p);
    int_up += mesh.area(t) * s / 3.0;
  }
  double sup_u = 0.0;
  for (auto v : patch_vertices(mesh, inner)) sup_u = std::max(sup_u, std::abs(u[v]));
  double int_grad = 0.0;
  for (auto t : inner) int_grad += mesh.area(t) * std::pow(u.gradient(t).norm(), p);

  const double base = std::pow(int_up, 1.0 / p) + std::pow(R, kDim / p + 1.0) * f_sup;
  LocalBoundedness out;
  if (sup_u > 0.0) out.r_sup = sup_u / (std::pow(R, -kDim / p) * base);
  if (int_grad > 0.0) out.r_grad = std::pow(int_grad, 1.0 / p) / (base / R);
  return out;
}

namespace {

template <class Cell>
double scale_sup(const Mesh& mesh, const std::vector<Center>& centers, const std::vector<double>& radii,
                 double lambda, Cell&& cell) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
  double sup = 0.0;
  for (const auto& c : centers) {
    for (double r : radii) sup = std::max(sup, std::pow(r, -lambda) * cell(ball_patch(mesh, c.x, r)));
  }
  return sup;
}

void check_field_size(const Mesh& mesh, const std::vector<Eigen::Vector2d>& field, double p) {
  if (field.size() != mesh.num_triangles()) throw StructuralError("field needs one vector per triangle");
  if (!(p >= 1.0)) throw DomainError("p must be at least 1");
}

} // namespace

double campanato_seminorm(const Mesh& mesh, const std::vector<Eigen::Vector2d>& field, double p, double lambda,
                          const std::vector<Center>& centers, const std::vector<double>& radii) {
  check_field_size(mesh, field, p);
  return scale_sup(mesh, centers, radii, lambda, [&](const std::vector<std::size_t>& patch) {
    const Eigen::Vector2d m = mean_of(mesh, field, patch);
    double s = 0.0;
    for (auto t : patch) s += mesh.area(t) * std::pow((field[t] - m).norm(), p);
    return s;
  });
}

double morrey_norm(const Mesh& mesh, const std::vector<Eigen::Vector2d>& field, double p, double lambda,
                   const std::vector<Center>& centers, const std::vector<double>& radii) {
  check_field_size(mesh, field, p);
  return scale_sup(mesh, centers, radii, lambda, [&](const std::vector<std::size_t>& patch) {
    double s = 0.0;
    for (auto t : patch) s += mesh.area(t) * std::pow(field[t].norm(), p);
    return s;
  });
}

RegularityReport regularity_report(const DiscreteField& u, double p, std::optional<double> f_sup,
                                   const std::vector<Center>& centers, const std::vector<double>& radii) {
  for (std::size_t j = 1; j < radii.size(); ++j) {
    if (!(radii[j] < radii[j - 1])) throw DomainError("radii must be strictly decreasing");
  }
  RegularityReport rep;
  rep.centers = centers;
  rep.radii = radii;
  rep.p = p;
  rep.lambda = kDim;
  rep.bmo = bmo_table(u, centers, radii);
  rep.osc = oscillation_modulus(u, centers, radii);
  for (const auto& row : rep.bmo) {
    for (double v : row) rep.bmo_sup = std::max(rep.bmo_sup, v);
  }
  rep.loglip_C = fit_log_lip(rep.osc, radii);
  rep.alpha_hat = holder_exponent(rep.osc, centers, radii);
  rep.alpha_hat_note = "exploratory: the exponent formula needs 2 < p < d, unattainable for d = 2";
  const auto grad = gradient_field(u);
  rep.campanato = campanato_seminorm(u.mesh(), grad, p, rep.lambda, centers, radii);
  rep.morrey = morrey_norm(u.mesh(), grad, p, rep.lambda, centers, radii);
  if (f_sup) {
    for (const auto& c : centers) {
      for (double r : radii) rep.lb_ratios.push_back({c.x, r, local_boundedness_ratio(u, p, *f_sup, c.x, r)});
    }
  }
  return rep;
}

void write_report_json(const RegularityReport& rep, const std::filesystem::path& path) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config_hash"] = rep.config_hash;
  auto& centers = j["centers"] = ordered_json::array();
  for (const auto& c : rep.centers) centers.push_back({{"x", c.x.x()}, {"y", c.x.y()}, {"on_interface", c.on_interface}});
  j["radii"] = rep.radii;
  j["bmo_values"] = rep.bmo;
  j["osc_values"] = rep.osc;
  ordered_json fitted;
  fitted["bmo_sup"] = rep.bmo_sup;
  fitted["alpha_hat"] = rep.alpha_hat ? ordered_json(*rep.alpha_hat) : ordered_json(nullptr);
  fitted["alpha_hat_status"] = rep.alpha_hat_note;
  fitted["loglip_C"] = rep.loglip_C;
  auto& lb = fitted["lb_ratios"] = ordered_json::array();
  for (const auto& e : rep.lb_ratios) {
    lb.push_back({{"x", e.center.x()}, {"y", e.center.y()}, {"R", e.R}, {"r_sup", e.ratio.r_sup},
                  {"r_grad", e.ratio.r_grad}});
  }
  fitted["campanato"] = rep.campanato;
  fitted["morrey"] = rep.morrey;
  fitted["lambda"] = rep.lambda;
  fitted["p"] = rep.p;
  j["fitted"] = std::move(fitted);
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

void write_metrics_csv(const RegularityReport& rep, const std::filesystem::path& path) {
  auto out = open_output(path);
  if (!rep.config_hash.empty()) out << "# config_hash=" << rep.config_hash << '\n';
  out << "center_x,center_y,r,bmo,osc\n";
  for (std::size_t i = 0; i < rep.centers.size(); ++i) {
    for (std::size_t j = 0; j < rep.radii.size(); ++j) {
      out << format_double(rep.centers[i].x.x()) << ',' << format_double(rep.centers[i].x.y()) << ','
          << format_double(rep.radii[j]) << ',' << format_double(rep.bmo[i][j]) << ','
          << format_double(rep.osc[i][j]) << '\n';
    }
  }
}

} // namespace otl
