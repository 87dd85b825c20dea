#pragma once

#include "otl/mesh.hpp"
#include "otl/orlicz.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace otl {

enum class DataKind { constant, angular_power };
enum class DeclaredSpace { Linf, Sobolev };

/// Interface datum f on Gamma. The angular-power family
/// f(theta) = c |wrap(theta - theta0)|^(-s) is unbounded at theta0 for s > 0.
struct InterfaceData {
  DataKind kind = DataKind::constant;
  double c = 1.0;
  double s = 0.0;
  double theta0 = 0.0;
  DeclaredSpace space = DeclaredSpace::Linf;
  double eps = 0.0; ///< integrability margin of the declared Sobolev space

  static InterfaceData constant(double c);
  /// Requires s (p' + eps) < 1 with p' = p/(p-1).
  static InterfaceData angular_power(double c, double s, double theta0, double eps, double p);

  /// Throws DomainError when the invariants fail for exponent p.
  void check(double p) const;
  bool bounded() const { return kind == DataKind::constant || s == 0.0; }
  /// ||f||_inf; throws DomainError for unbounded data.
  double sup_norm() const;
  /// f at interface parameter theta of `mesh`.
  double value(const Mesh& mesh, double theta) const;
  double value_at(const Mesh& mesh, const Point& x) const { return value(mesh, mesh.interface_parameter(x)); }
};

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& s);

/// Piecewise-linear field given by its vertex values; zero on the outer
/// boundary.
class DiscreteField {
public:
  explicit DiscreteField(const Mesh& mesh);
  /// Throws StructuralError on size mismatch or nonzero boundary values.
  DiscreteField(const Mesh& mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Setting a boundary vertex to a nonzero value throws StructuralError.
  void set(std::size_t i, double v);

  /// Constant gradient on triangle t.
  Eigen::Vector2d gradient(std::size_t t) const;
  double max_abs_difference(const DiscreteField& other) const;

private:
  const Mesh* mesh_;
  std::vector<double> values_;
};

/// Piecewise-linear interpolant of `fn`, with boundary values forced to 0.
template <class Fn>
DiscreteField interpolate(const Mesh& mesh, Fn&& fn) {
  std::vector<double> v(mesh.num_vertices(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mesh.on_boundary[i]) v[i] = fn(mesh.vertices[i]);
  }
  return DiscreteField(mesh, std::move(v));
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Per-mesh precomputation for the regularized Orlicz energy
///   E_delta(u) = sum_T |T| G(sqrt(|Du_T|^2 + delta^2)) - sum_q w_q f(x_q) u(x_q)
/// and its derivatives over the free (non-boundary) vertices.
class Discretization {
public:
  Discretization(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f);
  /// Energy restricted to `active` triangles with unknowns at the vertices
  /// flagged in `free_mask`; every other vertex keeps the value of the field
  /// it is evaluated on.
  Discretization(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                 const std::vector<bool>& free_mask, std::vector<std::size_t> active);

  const Mesh& mesh() const { return *mesh_; }
  const Nonlinearity& model() const { return nl_; }
  const InterfaceData& data() const { return f_; }

  std::size_t num_free() const { return free_to_vertex_.size(); }
  /// -1 for boundary vertices.
  std::int32_t free_index(std::size_t vertex) const { return vertex_to_free_[vertex]; }
  std::span<const VertexId> free_vertices() const { return free_to_vertex_; }

  Eigen::VectorXd restrict_to_free(const DiscreteField& u) const;
  /// Field equal to free_values on free vertices and to `base` elsewhere
  /// (zero when no base is given).
  DiscreteField extend(const Eigen::VectorXd& free_values) const;
  DiscreteField extend(const Eigen::VectorXd& free_values, const DiscreteField& base) const;
  std::span<const std::size_t> active_triangles() const { return active_; }

  /// Interface load over free vertices: b_i = sum_q w_q f(x_q) phi_i(x_q).
  const Eigen::VectorXd& load() const { return load_; }

  double energy(const DiscreteField& u, double delta) const;
  /// sum_T |T| G(m_T) over the active triangles only.
  double gradient_energy(const DiscreteField& u, double delta) const;
  /// E(u + t d) - E(u), evaluated per triangle from the increment so the
  /// result stays accurate when it is tiny relative to E(u).
  double energy_increment(const DiscreteField& u, const Eigen::VectorXd& direction, double t,
                          double delta) const;
  Eigen::VectorXd gradient(const DiscreteField& u, double delta) const;
  SparseMatrix hessian(const DiscreteField& u, double delta) const;
  /// Standard P1 stiffness matrix over free vertices.
  SparseMatrix stiffness() const;

  /// Gradient of local basis function k on triangle t.
  const Eigen::Vector2d& basis_gradient(std::size_t t, int k) const { return grad_phi_[3 * t + k]; }
  double area(std::size_t t) const { return area_[t]; }

private:
  void init(const std::vector<bool>& free_mask);
  void check_field(const DiscreteField& u) const;
  SparseMatrix assemble_matrix(const std::function<Eigen::Matrix2d(std::size_t)>& coefficient) const;

  const Mesh* mesh_;
  Nonlinearity nl_;
  InterfaceData f_;
  std::vector<std::int32_t> vertex_to_free_;
  std::vector<VertexId> free_to_vertex_;
  std::vector<Eigen::Vector2d> grad_phi_;
  std::vector<double> area_;
  std::vector<std::size_t> active_;
  Eigen::VectorXd load_;
  SparseMatrix pattern_;
  std::vector<std::int64_t> slots_; ///< 9 per triangle, -1 when a vertex is not free
};

double assemble_energy(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                       const DiscreteField& u, double delta);
Eigen::VectorXd assemble_gradient(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                                  const DiscreteField& u, double delta);
SparseMatrix assemble_hessian(const Mesh& mesh, const Nonlinearity& nl, const DiscreteField& u,
                              double delta);
/// Euclidean norm of the assembled gradient.
double weak_residual(const Mesh& mesh, const Nonlinearity& nl, const InterfaceData& f,
                     const DiscreteField& u, double delta);

void write_solution_csv(const DiscreteField& u, const std::filesystem::path& path, const std::string& hash);
void write_gradient_csv(const DiscreteField& u, const std::filesystem::path& path, const std::string& hash);
/// Reads the u column of solution.csv back into a field on `mesh`.
DiscreteField read_solution_csv(const Mesh& mesh, const std::filesystem::path& path);

} // namespace otl
