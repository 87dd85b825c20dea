#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace otl {

using Point = Eigen::Vector2d;
using VertexId = std::int32_t;

struct Triangle {
  std::array<VertexId, 3> v;
  int region; ///< 1 inside the interface, 2 outside
};

/// Interface edge with the unit normal pointing into region 1.
struct InterfaceEdge {
  std::array<VertexId, 2> v;
  Point normal;
  double weight; ///< edge length
};

struct QuadraturePoint {
  Point x;
  double weight;
  Point normal;
  std::size_t edge;   ///< index into interface_edges
  double s;           ///< local coordinate in [0,1] from v[0] to v[1]
};

/// Omega is either the disk B_R (interface a concentric circle of radius
/// rho) or the square [-R, R]^2 (interface the horizontal segment y = y0).
enum class Geometry { disk_circle, box_line };

class Mesh {
public:
  Geometry geometry = Geometry::disk_circle;
  double R = 1.0;              ///< disk radius or box half-width
  double interface_param = 0;  ///< rho for the circle, y0 for the line

  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<bool> on_boundary;
  std::vector<InterfaceEdge> interface_edges;
  double h = 0.0; ///< longest edge

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double area(std::size_t t) const;
  double signed_area(std::size_t t) const;
  Point barycenter(std::size_t t) const;

  /// Distance from x to the outer boundary (negative outside).
  double distance_to_boundary(const Point& x) const;
  bool contains_ball(const Point& x0, double r) const;

  /// Point on the interface at parameter theta (angle for the circle,
  /// abscissa for the line).
  Point interface_point(double theta) const;
  /// Inverse of interface_point for points on or near the interface.
  double interface_parameter(const Point& x) const;
  double interface_length_exact() const;
};

/// Ring mesh of B_R with rho-circle interface. Interface vertices are
/// equally spaced on the circle.
Mesh build_disk_mesh(double R, double rho, double h_target);

/// Structured mesh of [-R, R]^2 with a horizontal interface at y = y0;
/// region 1 is y < y0.
Mesh build_box_mesh(double R, double y0, double h_target);

/// Rigid rotation of every vertex and normal about the origin.
Mesh rotated(const Mesh& mesh, double angle);

/// Triangles whose barycenter lies in the closed ball B_r(x0), ascending.
/// Throws QueryError when the ball is not contained in Omega.
std::vector<std::size_t> ball_patch(const Mesh& mesh, const Point& x0, double r);

/// Distinct vertices of a triangle list, ascending.
std::vector<VertexId> patch_vertices(const Mesh& mesh, const std::vector<std::size_t>& tris);

/// Two-point Gauss rule on every interface edge.
std::vector<QuadraturePoint> interface_quadrature(const Mesh& mesh);

/// Sum of region-1 triangle areas.
double region_area(const Mesh& mesh, int region);

/// vertices.csv, triangles.csv, interface.csv; each file starts with a
/// "# config_hash=<hash>" line when hash is non-empty.
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir, const std::string& hash);

} // namespace otl
