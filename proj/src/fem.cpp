#include "otl/fem.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"
#include "otl/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace otl {

// ---------------------------------------------------------------------------
// InterfaceData

InterfaceData InterfaceData::constant(double c) {
  InterfaceData f;
  f.kind = DataKind::constant;
  f.c = c;
  f.space = DeclaredSpace::Linf;
  return f;
}

InterfaceData InterfaceData::angular_power(double c, double s, double theta0, double eps, double p) {
  InterfaceData f;
  f.kind = DataKind::angular_power;
  f.c = c;
  f.s = s;
  f.theta0 = theta0;
  f.eps = eps;
  f.space = DeclaredSpace::Sobolev;
  f.check(p);
  return f;
}

void InterfaceData::check(double p) const {
  if (kind == DataKind::constant) {
    if (space != DeclaredSpace::Linf) throw DomainError("constant interface data must be declared Linf");
    return;
  }
  if (!(s >= 0.0)) throw DomainError("data.s must be nonnegative");
  if (space == DeclaredSpace::Sobolev) {
    if (!(eps > 0.0)) throw DomainError("data.eps must be positive");
    const double p_dual = p / (p - 1.0);
    if (!(s * (p_dual + eps) < 1.0)) throw DomainError("angular-power data requires s (p' + eps) < 1");
  }
}

double InterfaceData::sup_norm() const {
  if (!bounded()) throw DomainError("interface data is unbounded");
  return std::abs(c);
}

double InterfaceData::value(const Mesh& mesh, double theta) const {
  if (kind == DataKind::constant || s == 0.0) return c;
  double d = theta - theta0;
  if (mesh.geometry == Geometry::disk_circle) d = std::remainder(d, 2.0 * std::numbers::pi);
  return c * std::pow(std::abs(d), -s);
}

std::string to_string(DataKind kind) { return kind == DataKind::constant ? "constant" : "angular-power"; }

DataKind data_kind_from_string(const std::string& s) {
  if (s == "constant") return DataKind::constant;
  if (s == "angular-power" || s == "angular_power") return DataKind::angular_power;
  throw DomainError("unknown data kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// DiscreteField

DiscreteField::DiscreteField(const Mesh& mesh) : mesh_(&mesh), values_(mesh.num_vertices(), 0.0) {}

DiscreteField::DiscreteField(const Mesh& mesh, std::vector<double> values)
    : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != mesh.num_vertices()) throw StructuralError("field size does not match mesh");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (mesh.on_boundary[i] && values_[i] != 0.0) throw StructuralError("field is nonzero on the boundary");
  }
}

void DiscreteField::set(std::size_t i, double v) {
  if (mesh_->on_boundary[i] && v != 0.0) throw StructuralError("field is nonzero on the boundary");
  values_[i] = v;
}

Eigen::Vector2d DiscreteField::gradient(std::size_t t) const {
  const auto& v = mesh_->triangles[t].v;
  const Point& p0 = mesh_->vertices[v[0]];
  const Eigen::Vector2d e1 = mesh_->vertices[v[1]] - p0;
  const Eigen::Vector2d e2 = mesh_->vertices[v[2]] - p0;
  const double d1 = values_[v[1]] - values_[v[0]];
  const double d2 = values_[v[2]] - values_[v[0]];
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  return {(d1 * e2.y() - d2 * e1.y()) / det, (d2 * e1.x() - d1 * e2.x()) / det};
}

double DiscreteField::max_abs_difference(const DiscreteField& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m = std::max(m, std::abs(values_[i] - other.values_[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Discretization

namespace {

constexpr std::array<double, 8> kGauss8Nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGauss8Weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

bool edge_near_singularity(const Mesh& mesh, const InterfaceData& f, const InterfaceEdge& e) {
  if (f.kind != DataKind::angular_power || f.s == 0.0) return false;
  const auto dist = [&](const Point& x) {
    double d = mesh.interface_parameter(x) - f.theta0;
    if (mesh.geometry == Geometry::disk_circle) {
      d = std::remainder(d, 2.0 * std::numbers::pi) * mesh.interface_param;
    }
    return std::abs(d);
  };
  const double d = std::min(dist(mesh.vertices[e.v[0]]), dist(mesh.vertices[e.v[1]]));
  return d <= 1.0001 * e.weight;
}

/// Chord parameter in [0, 1] at which the edge a-b meets the singular
/// point of f, or a negative value when it misses the edge.
double singular_parameter(const Mesh& mesh, const InterfaceData& f, const Point& a, const Point& b) {
  const Point ab = b - a;
  double sigma = -1.0;
  if (mesh.geometry == Geometry::disk_circle) {
    const Point dir(std::cos(f.theta0), std::sin(f.theta0));
    const double den = dir.x() * ab.y() - dir.y() * ab.x();
    if (den == 0.0) return -1.0;
    sigma = (dir.y() * a.x() - dir.x() * a.y()) / den;
    if (dir.dot(a + sigma * ab) <= 0.0) return -1.0; // opposite ray
  } else {
    if (ab.x() == 0.0) return -1.0;
    sigma = (f.theta0 - a.x()) / ab.x();
  }
  return sigma >= 0.0 && sigma <= 1.0 ? sigma : -1.0;
}
Eigen::Vector2d flux_for(const Nonlinearity& nl, const Eigen::Vector2d& xi, double delta) {
  if (delta > 0.0) return flux_delta<2>(nl, xi, delta);
  if (xi.squaredNorm() == 0.0) throw DomainError("unregularized derivative is singular at a zero gradient");
  return flux<2>(nl, xi);
}

} // namespace

Discretization::Discretization(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f)
    : mesh_(&mesh), nl_(nl), f_(f) {
  std::vector<bool> mask(mesh.num_vertices());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = !mesh.on_boundary[i];
  active_.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < active_.size(); ++t) active_[t] = t;
  init(mask);
}

Discretization::Discretization(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                               const std::vector<bool>& free_mask, std::vector<std::size_t> active)
    : mesh_(&mesh), nl_(nl), f_(f), active_(std::move(active)) {
  if (free_mask.size() != mesh.num_vertices()) throw StructuralError("free mask size does not match mesh");
  for (std::size_t i = 0; i < free_mask.size(); ++i) {
    if (free_mask[i] && mesh.on_boundary[i]) throw StructuralError("boundary vertex marked free");
  }
  for (auto t : active_) {
    if (t >= mesh.num_triangles()) throw StructuralError("active triangle out of range");
  }
  init(free_mask);
}

void Discretization::init(const std::vector<bool>& free_mask) {
  const Mesh& mesh = *mesh_;
  const InterfaceData& f = f_;
  const std::size_t nv = mesh.num_vertices();
  vertex_to_free_.assign(nv, -1);
  for (std::size_t i = 0; i < nv; ++i) {
    if (free_mask[i]) {
      vertex_to_free_[i] = static_cast<std::int32_t>(free_to_vertex_.size());
      free_to_vertex_.push_back(static_cast<VertexId>(i));
    }
  }

  const std::size_t nt = mesh.num_triangles();
  grad_phi_.resize(3 * nt);
  area_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles[t].v;
    const double two_area = 2.0 * mesh.signed_area(t);
    area_[t] = 0.5 * std::abs(two_area);
    for (int k = 0; k < 3; ++k) {
      const Point& a = mesh.vertices[v[(k + 1) % 3]];
      const Point& b = mesh.vertices[v[(k + 2) % 3]];
      // Rotated opposite edge, scaled so the gradient is +1 at vertex k.
      grad_phi_[3 * t + k] = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / two_area;
    }
  }

  load_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_free()));
  for (const auto& e : mesh.interface_edges) {
    const Point& a = mesh.vertices[e.v[0]];
    const Point& b = mesh.vertices[e.v[1]];
    const auto add = [&](double s, double w) {
      const double fx = f.value_at(mesh, a + s * (b - a));
      const std::int32_t i0 = vertex_to_free_[e.v[0]];
      const std::int32_t i1 = vertex_to_free_[e.v[1]];
      if (i0 >= 0) load_[i0] += w * fx * (1.0 - s);
      if (i1 >= 0) load_[i1] += w * fx * s;
    };
    if (edge_near_singularity(mesh, f, e)) {
      const double sigma = singular_parameter(mesh, f, a, b);
      if (sigma < 0.0) {
        for (std::size_t q = 0; q < kGauss8Nodes.size(); ++q) {
          add(0.5 * (1.0 + kGauss8Nodes[q]), 0.5 * e.weight * kGauss8Weights[q]);
        }
      } else {
        // Split at the singular point; on each side tau = L y^m with
        // m = 1/(1-s) turns |tau|^-s into a bounded integrand in y.
        const double m = 1.0 / (1.0 - f.s);
        for (const double L : {-sigma, 1.0 - sigma}) {
          if (L == 0.0) continue;
          for (std::size_t q = 0; q < kGauss8Nodes.size(); ++q) {
            const double y = 0.5 * (1.0 + kGauss8Nodes[q]);
            const double jac = std::abs(L) * m * std::pow(y, m - 1.0);
            add(sigma + L * std::pow(y, m), 0.5 * kGauss8Weights[q] * jac * e.weight);
          }
        }
      }
    } else {
      const double offs = 0.5 / std::sqrt(3.0);
      add(0.5 - offs, 0.5 * e.weight);
      add(0.5 + offs, 0.5 * e.weight);
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * active_.size());
  for (auto t : active_) {
    const auto& v = mesh.triangles[t].v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const auto i = vertex_to_free_[v[a]];
        const auto j = vertex_to_free_[v[b]];
        if (i >= 0 && j >= 0) trip.emplace_back(i, j, 1.0);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(num_free());
  pattern_.resize(n, n);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();
  slots_.assign(9 * active_.size(), -1);
  const auto* outer = pattern_.outerIndexPtr();
  const auto* inner = pattern_.innerIndexPtr();
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const std::size_t t = active_[k];
    const auto& v = mesh.triangles[t].v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const auto i = vertex_to_free_[v[a]];
        const auto j = vertex_to_free_[v[b]];
        if (i < 0 || j < 0) continue;
        const auto* pos = std::lower_bound(inner + outer[i], inner + outer[i + 1], j);
        slots_[9 * k + 3 * a + b] = pos - inner;
      }
    }
  }
}

void Discretization::check_field(const DiscreteField& u) const {
  if (&u.mesh() != mesh_ || u.values().size() != mesh_->num_vertices()) {
    throw StructuralError("field does not belong to this mesh");
  }
}

Eigen::VectorXd Discretization::restrict_to_free(const DiscreteField& u) const {
  check_field(u);
  Eigen::VectorXd x(static_cast<Eigen::Index>(num_free()));
  for (std::size_t k = 0; k < num_free(); ++k) x[static_cast<Eigen::Index>(k)] = u[free_to_vertex_[k]];
  return x;
}

DiscreteField Discretization::extend(const Eigen::VectorXd& free_values) const {
  return extend(free_values, DiscreteField(*mesh_));
}

DiscreteField Discretization::extend(const Eigen::VectorXd& free_values, const DiscreteField& base) const {
  check_field(base);
  if (static_cast<std::size_t>(free_values.size()) != num_free()) {
    throw StructuralError("free vector size does not match the discretization");
  }
  std::vector<double> v(base.values().begin(), base.values().end());
  for (std::size_t k = 0; k < num_free(); ++k) v[free_to_vertex_[k]] = free_values[static_cast<Eigen::Index>(k)];
  return DiscreteField(*mesh_, std::move(v));
}

double Discretization::gradient_energy(const DiscreteField& u, double delta) const {
  check_field(u);
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  return deterministic_sum(active_.size(), [&](std::size_t k) {
    const std::size_t t = active_[k];
    const double m = std::sqrt(u.gradient(t).squaredNorm() + delta * delta);
    return area_[t] * eval_G(nl_, m);
  });
}

double Discretization::energy(const DiscreteField& u, double delta) const {
  const double volume = gradient_energy(u, delta);
  return volume - load_.dot(restrict_to_free(u));
}

double Discretization::energy_increment(const DiscreteField& u, const Eigen::VectorXd& direction, double t,
                                        double delta) const {
  check_field(u);
  const DiscreteField d = extend(direction);
  const double volume = deterministic_sum(active_.size(), [&](std::size_t j) {
    const std::size_t k = active_[j];
    const Eigen::Vector2d xi = u.gradient(k);
    const Eigen::Vector2d dxi = t * d.gradient(k);
    const double m0 = std::sqrt(xi.squaredNorm() + delta * delta);
    const double dm2 = dxi.dot(2.0 * xi + dxi);
    const double m1 = std::sqrt(std::max(0.0, m0 * m0 + dm2));
    const double dm = m0 + m1 > 0.0 ? dm2 / (m0 + m1) : 0.0;
    return area_[k] * eval_G_increment(nl_, m0, dm);
  });
  return volume - t * load_.dot(direction);
}

Eigen::VectorXd Discretization::gradient(const DiscreteField& u, double delta) const {
  check_field(u);
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  const std::size_t nt = active_.size();
  std::vector<std::array<double, 3>> local(nt);
  parallel_chunks(nt, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t j = b; j < e; ++j) {
      const std::size_t t = active_[j];
      const Eigen::Vector2d F = flux_for(nl_, u.gradient(t), delta);
      for (int k = 0; k < 3; ++k) local[j][k] = area_[t] * F.dot(grad_phi_[3 * t + k]);
    }
  });
  Eigen::VectorXd g = -load_;
  for (std::size_t j = 0; j < nt; ++j) {
    const auto& v = mesh_->triangles[active_[j]].v;
    for (int k = 0; k < 3; ++k) {
      const auto i = vertex_to_free_[v[k]];
      if (i >= 0) g[i] += local[j][k];
    }
  }
  return g;
}

SparseMatrix Discretization::assemble_matrix(
    const std::function<Eigen::Matrix2d(std::size_t)>& coefficient) const {
  const std::size_t nt = active_.size();
  // Upper triangle of each local matrix: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2).
  std::vector<std::array<double, 6>> local(nt);
  parallel_chunks(nt, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t j = b; j < e; ++j) {
      const std::size_t t = active_[j];
      const Eigen::Matrix2d J = coefficient(t);
      int s = 0;
      for (int a = 0; a < 3; ++a) {
        const Eigen::Vector2d Ja = J * grad_phi_[3 * t + a];
        for (int c = a; c < 3; ++c) local[j][s++] = area_[t] * grad_phi_[3 * t + c].dot(Ja);
      }
    }
  });
  SparseMatrix H = pattern_;
  std::fill(H.valuePtr(), H.valuePtr() + H.nonZeros(), 0.0);
  double* val = H.valuePtr();
  for (std::size_t t = 0; t < nt; ++t) {
    int s = 0;
    for (int a = 0; a < 3; ++a) {
      for (int c = a; c < 3; ++c, ++s) {
        const auto ac = slots_[9 * t + 3 * a + c];
        if (ac < 0) continue;
        val[ac] += local[t][s];
        if (a != c) val[slots_[9 * t + 3 * c + a]] += local[t][s];
      }
    }
  }
  return H;
}

SparseMatrix Discretization::hessian(const DiscreteField& u, double delta) const {
  check_field(u);
  check_delta(delta);
  return assemble_matrix([&](std::size_t t) { return flux_delta_jacobian<2>(nl_, u.gradient(t), delta); });
}

SparseMatrix Discretization::stiffness() const {
  return assemble_matrix([](std::size_t) -> Eigen::Matrix2d { return Eigen::Matrix2d::Identity(); });
}

// ---------------------------------------------------------------------------
// Free-function forms

double assemble_energy(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                       const DiscreteField& u, double delta) {
  return Discretization(mesh, nl, f).energy(u, delta);
}

Eigen::VectorXd assemble_gradient(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                                  const DiscreteField& u, double delta) {
  return Discretization(mesh, nl, f).gradient(u, delta);
}

SparseMatrix assemble_hessian(const Mesh& mesh, const Nonlinearity& nl, const DiscreteField& u, double delta) {
  return Discretization(mesh, nl, InterfaceData::constant(0.0)).hessian(u, delta);
}

double weak_residual(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f, const DiscreteField& u,
                     double delta) {
  return assemble_gradient(mesh, nl, f, u, delta).norm();
}

void write_solution_csv(const DiscreteField& u, const std::filesystem::path& path, const std::string& hash) {
  auto out = open_output(path);
  if (!hash.empty()) out << "# config_hash=" << hash << '\n';
  out << "vertex_id,x,y,u\n";
  const Mesh& mesh = u.mesh();
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    out << i << ',' << format_double(mesh.vertices[i].x()) << ',' << format_double(mesh.vertices[i].y()) << ','
        << format_double(u[i]) << '\n';
  }
}

void write_gradient_csv(const DiscreteField& u, const std::filesystem::path& path, const std::string& hash) {
  auto out = open_output(path);
  if (!hash.empty()) out << "# config_hash=" << hash << '\n';
  out << "tri_id,cx,cy,dux,duy,region\n";
  const Mesh& mesh = u.mesh();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.barycenter(t);
    const Eigen::Vector2d g = u.gradient(t);
    out << t << ',' << format_double(c.x()) << ',' << format_double(c.y()) << ',' << format_double(g.x()) << ','
        << format_double(g.y()) << ',' << mesh.triangles[t].region << '\n';
  }
}

DiscreteField read_solution_csv(const Mesh& mesh, const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col_id = table.column("vertex_id");
  const std::size_t col_u = table.column("u");
  if (table.rows.size() != mesh.num_vertices()) {
    throw ArtifactError("solution.csv has " + std::to_string(table.rows.size()) + " rows, mesh has " +
                        std::to_string(mesh.num_vertices()) + " vertices");
  }
  std::vector<double> v(mesh.num_vertices(), 0.0);
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(col_id, col_u)) throw ArtifactError("short row in solution.csv");
    const auto id = std::stoull(row[col_id]);
    if (id >= v.size()) throw ArtifactError("vertex id out of range in solution.csv");
    v[id] = std::stod(row[col_u]);
  }
  return DiscreteField(mesh, std::move(v));
}

} // namespace otl
