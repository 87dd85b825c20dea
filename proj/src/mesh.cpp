#include "otl/mesh.hpp"

#include "otl/error.hpp"
#include "otl/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Ring and arc spacing relative to h_target; keeps diagonals below 1.5 h.
constexpr double kSpacing = 0.85;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

void push_oriented(Mesh& mesh, VertexId a, VertexId b, VertexId c, int region) {
  const Point& pa = mesh.vertices[a];
  if (cross(mesh.vertices[b] - pa, mesh.vertices[c] - pa) < 0.0) std::swap(b, c);
  mesh.triangles.push_back({{a, b, c}, region});
}

struct Ring {
  VertexId first;
  int count;
  double radius;
};

Ring add_ring(Mesh& mesh, double radius, int count, bool boundary) {
  Ring ring{static_cast<VertexId>(mesh.vertices.size()), count, radius};
  for (int k = 0; k < count; ++k) {
    const double th = kTwoPi * k / count;
    mesh.vertices.emplace_back(radius * std::cos(th), radius * std::sin(th));
    mesh.on_boundary.push_back(boundary);
  }
  return ring;
}

/// Triangulates the annular strip between two rings by advancing along
/// whichever ring has the smaller next angle. Every ring edge ends up in
/// exactly one strip triangle.
void stitch(Mesh& mesh, const Ring& inner, const Ring& outer, int region) {
  int i = 0;
  int j = 0;
  const auto id = [](const Ring& r, int k) { return r.first + static_cast<VertexId>(k % r.count); };
  while (i < inner.count || j < outer.count) {
    const double next_inner = static_cast<double>(i + 1) / inner.count;
    const double next_outer = static_cast<double>(j + 1) / outer.count;
    if (j == outer.count || (i < inner.count && next_inner <= next_outer)) {
      push_oriented(mesh, id(inner, i), id(inner, i + 1), id(outer, j), region);
      ++i;
    } else {
      push_oriented(mesh, id(inner, i), id(outer, j + 1), id(outer, j), region);
      ++j;
    }
  }
}

void finalize_h(Mesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, (mesh.vertices[t.v[k]] - mesh.vertices[t.v[(k + 1) % 3]]).norm());
    }
  }
  mesh.h = h;
}

} // namespace

double Mesh::signed_area(std::size_t t) const {
  const auto& v = triangles[t].v;
  return 0.5 * cross(vertices[v[1]] - vertices[v[0]], vertices[v[2]] - vertices[v[0]]);
}

double Mesh::area(std::size_t t) const { return std::abs(signed_area(t)); }

Point Mesh::barycenter(std::size_t t) const {
  const auto& v = triangles[t].v;
  return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) / 3.0;
}

double Mesh::distance_to_boundary(const Point& x) const {
  if (geometry == Geometry::disk_circle) return R - x.norm();
  return R - std::max(std::abs(x.x()), std::abs(x.y()));
}

bool Mesh::contains_ball(const Point& x0, double r) const { return r <= distance_to_boundary(x0); }

Point Mesh::interface_point(double theta) const {
  if (geometry == Geometry::disk_circle) {
    return {interface_param * std::cos(theta), interface_param * std::sin(theta)};
  }
  return {theta, interface_param};
}

double Mesh::interface_parameter(const Point& x) const {
  if (geometry == Geometry::disk_circle) return std::atan2(x.y(), x.x());
  return x.x();
}

double Mesh::interface_length_exact() const {
  if (geometry == Geometry::disk_circle) return kTwoPi * interface_param;
  return 2.0 * R;
}

Mesh build_disk_mesh(double R, double rho, double h_target) {
  if (!(R > 0.0)) throw MeshError("disk radius R must be positive");
  if (!(rho > 0.0 && rho < R)) throw MeshError("interface radius rho must lie in (0, R)");
  if (!(h_target > 0.0 && h_target <= 0.5 * (R - rho))) {
    throw MeshError("h_target must lie in (0, (R - rho)/2]");
  }
  Mesh mesh;
  mesh.geometry = Geometry::disk_circle;
  mesh.R = R;
  mesh.interface_param = rho;

  const double step = kSpacing * h_target;
  const auto ring_count = [&](double r) {
    return std::max(6, static_cast<int>(std::ceil(kTwoPi * r / step)));
  };
  // Interface ring count is 6 * 2^m so that halving h_target at least
  // doubles the number of interface edges.
  int n_gamma = 6;
  while (n_gamma < kTwoPi * rho / step) n_gamma *= 2;

  mesh.vertices.emplace_back(0.0, 0.0);
  mesh.on_boundary.push_back(false);

  const int n_inner = std::max(1, static_cast<int>(std::ceil(rho / step)));
  const int n_outer = std::max(2, static_cast<int>(std::ceil((R - rho) / step)));

  Ring interface_ring{};
  Ring prev{};
  for (int k = 1; k <= n_inner; ++k) {
    const double r = rho * k / n_inner;
    const Ring ring = add_ring(mesh, r, k == n_inner ? n_gamma : ring_count(r), false);
    if (k == 1) {
      for (int s = 0; s < ring.count; ++s) {
        push_oriented(mesh, 0, ring.first + s, ring.first + (s + 1) % ring.count, 1);
      }
    } else {
      stitch(mesh, prev, ring, 1);
    }
    prev = ring;
  }
  interface_ring = prev;
  for (int k = 1; k <= n_outer; ++k) {
    const double r = k == n_outer ? R : rho + (R - rho) * k / n_outer;
    const Ring ring = add_ring(mesh, r, ring_count(r), k == n_outer);
    stitch(mesh, prev, ring, 2);
    prev = ring;
  }

  for (int s = 0; s < interface_ring.count; ++s) {
    const VertexId a = interface_ring.first + s;
    const VertexId b = interface_ring.first + (s + 1) % interface_ring.count;
    const Point mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    mesh.interface_edges.push_back(
        {{a, b}, -mid.normalized(), (mesh.vertices[b] - mesh.vertices[a]).norm()});
  }
  finalize_h(mesh);
  return mesh;
}

Mesh build_box_mesh(double R, double y0, double h_target) {
  if (!(R > 0.0)) throw MeshError("box half-width must be positive");
  if (!(h_target > 0.0)) throw MeshError("h_target must be positive");
  if (!(std::abs(y0) < R - 2.0 * h_target)) throw MeshError("interface line too close to the boundary");
  Mesh mesh;
  mesh.geometry = Geometry::box_line;
  mesh.R = R;
  mesh.interface_param = y0;

  const int nx = static_cast<int>(std::ceil(2.0 * R / h_target));
  const int n_below = static_cast<int>(std::ceil((y0 + R) / h_target));
  const int n_above = static_cast<int>(std::ceil((R - y0) / h_target));
  const int ny = n_below + n_above;
  const auto y_of = [&](int j) {
    if (j == ny) return R;
    return j <= n_below ? -R + (y0 + R) * j / n_below : y0 + (R - y0) * (j - n_below) / n_above;
  };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? R : -R + 2.0 * R * i / nx;
      mesh.vertices.emplace_back(x, y_of(j));
      mesh.on_boundary.push_back(i == 0 || i == nx || j == 0 || j == ny);
    }
  }
  const auto id = [&](int i, int j) { return static_cast<VertexId>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j) {
    const int region = j < n_below ? 1 : 2;
    for (int i = 0; i < nx; ++i) {
      if ((i + j) % 2 == 0) {
        push_oriented(mesh, id(i, j), id(i + 1, j), id(i + 1, j + 1), region);
        push_oriented(mesh, id(i, j), id(i + 1, j + 1), id(i, j + 1), region);
      } else {
        push_oriented(mesh, id(i, j), id(i + 1, j), id(i, j + 1), region);
        push_oriented(mesh, id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), region);
      }
    }
  }
  for (int i = 0; i < nx; ++i) {
    const VertexId a = id(i, n_below);
    const VertexId b = id(i + 1, n_below);
    mesh.interface_edges.push_back({{a, b}, Point(0.0, -1.0), (mesh.vertices[b] - mesh.vertices[a]).norm()});
  }
  finalize_h(mesh);
  return mesh;
}

Mesh rotated(const Mesh& mesh, double angle) {
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Mesh out = mesh;
  for (auto& v : out.vertices) v = rot * v;
  for (auto& e : out.interface_edges) e.normal = rot * e.normal;
  return out;
}

std::vector<std::size_t> ball_patch(const Mesh& mesh, const Point& x0, double r) {
  if (!(r > 0.0)) throw QueryError("ball radius must be positive");
  if (!mesh.contains_ball(x0, r)) throw QueryError("ball is not contained in the domain");
  std::vector<std::size_t> out;
  const double r2 = r * r;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if ((mesh.barycenter(t) - x0).squaredNorm() <= r2) out.push_back(t);
  }
  return out;
}

std::vector<VertexId> patch_vertices(const Mesh& mesh, const std::vector<std::size_t>& tris) {
  std::vector<VertexId> out;
  out.reserve(3 * tris.size());
  for (auto t : tris) {
    for (auto v : mesh.triangles[t].v) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<QuadraturePoint> interface_quadrature(const Mesh& mesh) {
  const double offs = 0.5 / std::sqrt(3.0);
  std::vector<QuadraturePoint> out;
  out.reserve(2 * mesh.interface_edges.size());
  for (std::size_t e = 0; e < mesh.interface_edges.size(); ++e) {
    const auto& edge = mesh.interface_edges[e];
    const Point& a = mesh.vertices[edge.v[0]];
    const Point& b = mesh.vertices[edge.v[1]];
    for (double s : {0.5 - offs, 0.5 + offs}) {
      out.push_back({a + s * (b - a), 0.5 * edge.weight, edge.normal, e, s});
    }
  }
  return out;
}

double region_area(const Mesh& mesh, int region) {
  double a = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.triangles[t].region == region) a += mesh.area(t);
  }
  return a;
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir, const std::string& hash) {
  const auto header = [&](std::ofstream& out) {
    if (!hash.empty()) out << "# config_hash=" << hash << '\n';
  };
  {
    auto out = open_output(dir / "vertices.csv");
    header(out);
    out << "id,x,y,on_boundary\n";
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      out << i << ',' << format_double(mesh.vertices[i].x()) << ',' << format_double(mesh.vertices[i].y())
          << ',' << (mesh.on_boundary[i] ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(dir / "triangles.csv");
    header(out);
    out << "id,v0,v1,v2,region\n";
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles[t];
      out << t << ',' << tri.v[0] << ',' << tri.v[1] << ',' << tri.v[2] << ',' << tri.region << '\n';
    }
  }
  {
    auto out = open_output(dir / "interface.csv");
    header(out);
    out << "v0,v1,nx,ny,weight\n";
    for (const auto& e : mesh.interface_edges) {
      out << e.v[0] << ',' << e.v[1] << ',' << format_double(e.normal.x()) << ','
          << format_double(e.normal.y()) << ',' << format_double(e.weight) << '\n';
    }
  }
}

} // namespace otl
