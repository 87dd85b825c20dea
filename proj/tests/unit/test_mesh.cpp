#include "otl/error.hpp"
#include "otl/mesh.hpp"

#include "../support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <utility>

using namespace otl;

namespace {

constexpr double kPi = std::numbers::pi;

using Edge = std::pair<VertexId, VertexId>;

Edge key(VertexId a, VertexId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Edge -> triangles using it.
std::map<Edge, std::vector<std::size_t>> edge_map(const Mesh& m) {
  std::map<Edge, std::vector<std::size_t>> out;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& v = m.triangles[t].v;
    for (int k = 0; k < 3; ++k) out[key(v[k], v[(k + 1) % 3])].push_back(t);
  }
  return out;
}

double total_area(const Mesh& m) {
  double a = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) a += m.area(t);
  return a;
}

void check_invariants(const Mesh& m) {
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    REQUIRE(m.signed_area(t) > 0.0);
    REQUIRE((m.triangles[t].region == 1 || m.triangles[t].region == 2));
  }
  // Conforming: interior edges shared by two triangles, boundary edges by one
  // with both endpoints flagged; a disk-topology complex has V - E + T = 1.
  const auto edges = edge_map(m);
  for (const auto& [e, tris] : edges) {
    REQUIRE(tris.size() >= 1);
    REQUIRE(tris.size() <= 2);
    if (tris.size() == 1) {
      REQUIRE(m.on_boundary[e.first]);
      REQUIRE(m.on_boundary[e.second]);
    }
  }
  const long euler = static_cast<long>(m.num_vertices()) - static_cast<long>(edges.size()) +
                     static_cast<long>(m.num_triangles());
  CHECK(euler == 1);

  for (const auto& ie : m.interface_edges) {
    const auto& tris = edges.at(key(ie.v[0], ie.v[1]));
    REQUIRE(tris.size() == 2);
    std::set<int> regions{m.triangles[tris[0]].region, m.triangles[tris[1]].region};
    CHECK(regions == std::set<int>{1, 2});
    CHECK(std::abs(ie.normal.norm() - 1.0) <= 1e-12);
    const Point mid = 0.5 * (m.vertices[ie.v[0]] + m.vertices[ie.v[1]]);
    // Moving a little along the normal from the midpoint enters region 1.
    const Point probe = mid + 0.25 * m.h * ie.normal;
    if (m.geometry == Geometry::disk_circle) {
      CHECK(mid.dot(ie.normal) < 0.0);
      CHECK(probe.norm() < m.interface_param);
      for (auto v : ie.v) CHECK(std::abs(m.vertices[v].norm() - m.interface_param) <= 1e-12 * m.interface_param);
    } else {
      CHECK(probe.y() < m.interface_param);
      for (auto v : ie.v) CHECK(std::abs(m.vertices[v].y() - m.interface_param) <= 1e-12);
    }
    CHECK(ie.weight == doctest::Approx((m.vertices[ie.v[1]] - m.vertices[ie.v[0]]).norm()).epsilon(1e-15));
  }

  // Region tags agree with the geometry at the barycenter.
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Point b = m.barycenter(t);
    const bool inside = m.geometry == Geometry::disk_circle ? b.norm() < m.interface_param : b.y() < m.interface_param;
    CHECK(m.triangles[t].region == (inside ? 1 : 2));
  }

  std::size_t boundary_count = 0;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    if (!m.on_boundary[i]) continue;
    ++boundary_count;
    if (m.geometry == Geometry::disk_circle) {
      CHECK(std::abs(m.vertices[i].norm() - m.R) <= 1e-12 * m.R);
    } else {
      CHECK(std::abs(std::max(std::abs(m.vertices[i].x()), std::abs(m.vertices[i].y())) - m.R) <= 1e-12 * m.R);
    }
  }
  CHECK(boundary_count > 0);
  // Every vertex on the outer boundary is flagged.
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    if (m.distance_to_boundary(m.vertices[i]) <= 1e-12 * m.R) CHECK(m.on_boundary[i]);
  }
}

Point unit_dir(double a) { return {std::cos(a), std::sin(a)}; }

double polygon_area_error(double h) {
  const Mesh m = build_disk_mesh(1.0, 0.5, h);
  return std::abs(region_area(m, 1) - kPi * 0.25);
}

} // namespace

TEST_CASE("disk mesh at h_target 0.25 covers the disk and resolves the interface") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.25);
  CHECK(m.interface_edges.size() >= 16);
  CHECK(otl_test::rel_err(total_area(m), kPi) <= 0.02);
  CHECK(m.h <= 1.5 * 0.25);
  check_invariants(m);
}

TEST_CASE("disk mesh invariants hold over a range of sizes") {
  for (double h : {0.2, 0.125, 0.0625, 0.04, 0.03125}) {
    CAPTURE(h);
    const Mesh m = build_disk_mesh(1.0, 0.5, h);
    check_invariants(m);
    CHECK(m.h <= 1.5 * h);
    // Region-1 area converges at second order.
    CHECK(std::abs(region_area(m, 1) - kPi * 0.25) / (kPi * 0.25) <= m.h * m.h * 10.0 / 0.25);
  }
  for (double rho : {0.2, 0.7}) {
    CAPTURE(rho);
    const Mesh m = build_disk_mesh(2.0, rho, 0.1);
    check_invariants(m);
    CHECK(m.h <= 1.5 * 0.1);
  }
}

TEST_CASE("halving h_target cuts the interface polygon area error by at least 3") {
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    CAPTURE(h);
    CHECK(polygon_area_error(h) / polygon_area_error(0.5 * h) >= 3.0);
  }
}

TEST_CASE("halving h_target at least doubles the interface edge count") {
  double h = 0.25;
  std::size_t prev = build_disk_mesh(1.0, 0.5, h).interface_edges.size();
  for (int k = 0; k < 4; ++k) {
    h *= 0.5;
    const std::size_t now = build_disk_mesh(1.0, 0.5, h).interface_edges.size();
    CHECK(now >= 2 * prev);
    prev = now;
  }
}

TEST_CASE("infeasible disk parameters are rejected") {
  CHECK_THROWS_AS(build_disk_mesh(1.0, 1.0, 0.1), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(1.0, 1.5, 0.1), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(1.0, 0.0, 0.1), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(0.0, 0.5, 0.1), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(1.0, 0.5, 0.0), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(1.0, 0.5, 0.3), MeshError);
}

TEST_CASE("box mesh invariants and the flat interface") {
  const Mesh m = build_box_mesh(1.0, 0.1, 0.1);
  check_invariants(m);
  CHECK(otl_test::rel_err(total_area(m), 4.0) <= 1e-12);
  CHECK(otl_test::rel_err(region_area(m, 1), 2.0 * 1.1) <= 1e-12);
  double len = 0.0;
  for (const auto& e : m.interface_edges) len += e.weight;
  CHECK(otl_test::rel_err(len, 2.0) <= 1e-12);
  CHECK_THROWS_AS(build_box_mesh(1.0, 0.9, 0.1), MeshError);
}

TEST_CASE("interface quadrature weights and normals") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.05);
  const auto q = interface_quadrature(m);
  CHECK(q.size() == 2 * m.interface_edges.size());
  double sum = 0.0;
  for (const auto& p : q) {
    CHECK(p.weight > 0.0);
    CHECK(std::abs(p.normal.norm() - 1.0) <= 1e-12);
    sum += p.weight;
  }
  CHECK(otl_test::rel_err(sum, kPi) <= 0.005);
  // The two-point rule integrates cubics along each edge exactly.
  {
    double approx = 0.0;
    double exact = 0.0;
    for (const auto& p : q) approx += p.weight * p.x.x() * p.x.x() * p.x.x();
    for (const auto& e : m.interface_edges) {
      const double a = m.vertices[e.v[0]].x();
      const double b = m.vertices[e.v[1]].x();
      // int_0^1 (a + s(b-a))^3 ds * length
      exact += e.weight * (a + b) * (a * a + b * b) / 4.0;
    }
    CHECK(std::abs(approx - exact) <= 1e-13);
  }
}

TEST_CASE("ball_patch selects barycenters inside the closed ball") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.05);
  otl_test::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double rad = gen.range(0.0, 0.6);
    const Point x0 = rad * unit_dir(gen.angle());
    const double rmax = 1.0 - x0.norm();
    const double r1 = gen.range(0.01, rmax);
    const double r2 = gen.range(r1, rmax);
    const auto p1 = ball_patch(m, x0, r1);
    const auto p2 = ball_patch(m, x0, r2);
    CHECK(std::is_sorted(p1.begin(), p1.end()));
    CHECK(std::includes(p2.begin(), p2.end(), p1.begin(), p1.end()));
    std::size_t brute = 0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) brute += (m.barycenter(t) - x0).norm() <= r1;
    CHECK(brute == p1.size());
  }
}

TEST_CASE("ball_patch small and large balls") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.1);
  const Point x0(0.013, -0.021);
  double dmin = 1e300;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) dmin = std::min(dmin, (m.barycenter(t) - x0).norm());
  CHECK(ball_patch(m, x0, 0.5 * dmin).empty());

  const double r = std::nextafter(1.0, 0.0);
  const auto all = ball_patch(m, Point(0.0, 0.0), r);
  std::size_t brute = 0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) brute += m.barycenter(t).norm() <= r;
  CHECK(all.size() == brute);
  CHECK(all.size() == m.num_triangles());

  CHECK_THROWS_AS(ball_patch(m, Point(0.5, 0.0), 0.6), QueryError);
  CHECK_THROWS_AS(ball_patch(m, Point(0.0, 0.0), 0.0), QueryError);
}

TEST_CASE("ball_patch area approximates the disk area to O(h/r)") {
  for (double h : {0.05, 0.025}) {
    const Mesh m = build_disk_mesh(1.0, 0.5, h);
    otl_test::Gen gen(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Point x0 = gen.range(0.0, 0.5) * unit_dir(gen.angle());
      const double r = gen.range(4.0 * m.h, 1.0 - x0.norm());
      double a = 0.0;
      for (auto t : ball_patch(m, x0, r)) a += m.area(t);
      CAPTURE(h);
      CAPTURE(r);
      CHECK(otl_test::rel_err(a, kPi * r * r) <= 4.0 * m.h / r);
    }
  }
}

TEST_CASE("rotation preserves areas and rotates normals") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.1);
  const Mesh r = rotated(m, 0.7);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    CHECK(r.signed_area(t) == doctest::Approx(m.signed_area(t)).epsilon(1e-12));
  }
  for (const auto& e : r.interface_edges) {
    const Point mid = 0.5 * (r.vertices[e.v[0]] + r.vertices[e.v[1]]);
    CHECK((mid.normalized() + e.normal).norm() <= 1e-12);
  }
}

TEST_CASE("patch_vertices returns distinct sorted ids") {
  const Mesh m = build_disk_mesh(1.0, 0.5, 0.1);
  const auto tris = ball_patch(m, Point(0.2, 0.1), 0.3);
  const auto verts = patch_vertices(m, tris);
  CHECK(std::is_sorted(verts.begin(), verts.end()));
  CHECK(std::adjacent_find(verts.begin(), verts.end()) == verts.end());
  std::set<VertexId> brute;
  for (auto t : tris) brute.insert(m.triangles[t].v.begin(), m.triangles[t].v.end());
  CHECK(brute.size() == verts.size());
}
