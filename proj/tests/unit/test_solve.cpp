#include "otl/error.hpp"
#include "otl/fem.hpp"
#include "otl/mesh.hpp"
#include "otl/orlicz.hpp"
#include "otl/solve.hpp"

#include "../support.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace otl;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

Eigen::VectorXd random_vector(otl_test::Gen& gen, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (auto& x : v) x = gen.range(-1.0, 1.0);
  return v;
}

const Mesh& disk() {
  static const Mesh mesh = build_disk_mesh(1.0, 0.5, 0.0625);
  return mesh;
}

} // namespace

TEST_CASE("cg on the identity returns the right-hand side") {
  otl_test::Gen gen(1);
  const Eigen::VectorXd b = random_vector(gen, 40);
  const Eigen::VectorXd x = cg_solve(sparse(Eigen::MatrixXd::Identity(40, 40)), b, 1e-12);
  CHECK((x - b).norm() <= 1e-12 * b.norm());
  CHECK(cg_solve(sparse(Eigen::MatrixXd::Identity(5, 5)), Eigen::VectorXd::Zero(5), 1e-12).norm() == 0.0);
}

TEST_CASE("cg on diag(1..n)") {
  otl_test::Gen gen(2);
  const int n = 50;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = i + 1.0;
  const Eigen::VectorXd b = random_vector(gen, n);
  const double tol = 1e-10;
  const Eigen::VectorXd x = cg_solve(sparse(D), b, tol);
  for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - b[i] / (i + 1.0)) <= tol * b.norm());
  CHECK((D * x - b).norm() <= tol * b.norm());
}

TEST_CASE("cg on random SPD matrices agrees with a dense Cholesky factorization") {
  otl_test::Gen gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + gen.below(60);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = gen.range(-1.0, 1.0);
    }
    const Eigen::MatrixXd H = A * A.transpose() + Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd b = random_vector(gen, n);
    const Eigen::VectorXd ref = H.llt().solve(b);
    const Eigen::VectorXd x = cg_solve(sparse(H), b, 1e-13);
    CHECK((x - ref).norm() <= 1e-8 * ref.norm());
    CHECK((H * x - b).norm() <= 1e-13 * b.norm());
  }
}

TEST_CASE("cg failures raise linear-solve errors") {
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(4, 4);
  H(2, 2) = -1.0;
  CHECK_THROWS_AS(cg_solve(sparse(H), Eigen::VectorXd::Ones(4), 1e-10), LinearSolveError);
  otl_test::Gen gen(4);
  Eigen::MatrixXd A(30, 30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) A(i, j) = gen.range(-1.0, 1.0);
  }
  const Eigen::MatrixXd S = A * A.transpose() + 1e-3 * Eigen::MatrixXd::Identity(30, 30);
  CHECK_THROWS_AS(cg_solve(sparse(S), Eigen::VectorXd::Ones(30), 1e-14, 2), LinearSolveError);
  CHECK_THROWS_AS(cg_solve(sparse(S), Eigen::VectorXd::Ones(29), 1e-10), LinearSolveError);
}

TEST_CASE("zero data gives the zero minimizer from any start") {
  const Nonlinearity nl = Nonlinearity::power(3.0);
  SolverConfig cfg;
  const auto zero = minimize(disk(), nl, InterfaceData::constant(0.0), cfg);
  CHECK(zero.u.max_abs_difference(DiscreteField(disk())) == 0.0);
  cfg.initial_guess = "random";
  cfg.seed = 7;
  const auto from_random = minimize(disk(), nl, InterfaceData::constant(0.0), cfg);
  CHECK(from_random.residual <= from_random.tolerance);
  // Residual 1e-12 at delta 1e-6; the flat p = 3 energy leaves |u| tiny
  // but not zero.
  CHECK(from_random.u.max_abs_difference(DiscreteField(disk())) <= 1e-4);
}

TEST_CASE("minimizer does not depend on the initial guess") {
  for (const Nonlinearity& nl : {Nonlinearity::power(3.0), Nonlinearity::power_log(3.0, 2.0, 1.0)}) {
    const auto f = InterfaceData::constant(1.0);
    SolverConfig cfg;
    const auto a = minimize(disk(), nl, f, cfg);
    cfg.initial_guess = "random";
    cfg.seed = 7;
    const auto b = minimize(disk(), nl, f, cfg);
    CHECK(a.residual <= a.tolerance);
    CHECK(b.residual <= b.tolerance);
    CHECK(a.u.max_abs_difference(b.u) <= 1e-7);
  }
}

TEST_CASE("trace energies strictly decrease within each stage") {
  const auto f = InterfaceData::angular_power(1.0, 0.3, 0.4, 0.1, 3.0);
  SolverConfig cfg;
  cfg.initial_guess = "random";
  cfg.seed = 11;
  const auto res = minimize(disk(), Nonlinearity::power_log(3.0, 2.0, 1.0), f, cfg);
  REQUIRE(res.trace.size() > 2);
  int stages = 1;
  for (std::size_t k = 1; k < res.trace.size(); ++k) {
    const auto& prev = res.trace[k - 1];
    const auto& cur = res.trace[k];
    if (cur.iter == 0) {
      ++stages;
      CHECK(cur.stage_delta < prev.stage_delta);
      continue;
    }
    CHECK(cur.stage_delta == prev.stage_delta);
    CHECK(cur.decrease < 0.0);
    // The stored energy is a double: an exact decrease below its rounding
    // leaves it unchanged.
    CHECK(cur.energy <= prev.energy);
    if (-cur.decrease > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(prev.energy)) {
      CHECK(cur.energy < prev.energy);
    }
    CHECK(cur.step_len > 0.0);
  }
  CHECK(stages == 6);
  CHECK(res.trace.back().stage_delta == cfg.delta_min);
  // Energy in the trace is consistent with a direct evaluation.
  const Discretization disc(disk(), Nonlinearity::power_log(3.0, 2.0, 1.0), f);
  CHECK(std::abs(res.trace.back().energy - disc.energy(res.u, cfg.delta_min)) <= 1e-12);
}

TEST_CASE("minimize is deterministic") {
  SolverConfig cfg;
  cfg.initial_guess = "random";
  cfg.seed = 3;
  const auto f = InterfaceData::constant(1.0);
  const auto a = minimize(disk(), Nonlinearity::power(2.5), f, cfg);
  const auto b = minimize(disk(), Nonlinearity::power(2.5), f, cfg);
  CHECK(a.u.max_abs_difference(b.u) == 0.0);
  CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("delta continuation is stable below delta_min") {
  const Nonlinearity nl = Nonlinearity::power(3.0);
  const auto f = InterfaceData::constant(1.0);
  SolverConfig cfg;
  const auto a = minimize(disk(), nl, f, cfg);
  cfg.delta_min = 1e-7;
  const auto b = minimize(disk(), nl, f, cfg);
  const double ea = assemble_energy(disk(), nl, f, a.u, 0.0);
  const double eb = assemble_energy(disk(), nl, f, b.u, 0.0);
  CHECK(std::abs(ea - eb) <= 1e-6 * std::abs(ea));
}

TEST_CASE("iteration cap without convergence raises a solver error") {
  SolverConfig cfg;
  cfg.max_newton = 1;
  cfg.delta0 = cfg.delta_min;
  CHECK_THROWS_AS(minimize(disk(), Nonlinearity::power(3.0), InterfaceData::constant(1.0), cfg), SolverError);
  cfg = SolverConfig{};
  cfg.delta_shrink = 1.5;
  CHECK_THROWS_AS(minimize(disk(), Nonlinearity::power(3.0), InterfaceData::constant(1.0), cfg), ConfigError);
}

TEST_CASE("replacement reproduces affine data") {
  const Mesh mesh = build_disk_mesh(1.0, 0.5, 0.05);
  const auto affine = interpolate(mesh, [](const Point& x) { return 0.7 * x.x() - 0.4 * x.y() + 0.1; });
  SolverConfig cfg;
  for (double p : {2.5, 3.0, 4.0}) {
    const auto h = p_harmonic_replacement(mesh, Nonlinearity::power(p), affine, Point(0.1, -0.2), 0.4, cfg);
    CHECK(h.max_abs_difference(affine) <= 1e-10);
  }
}

TEST_CASE("replacement keeps values off the patch and lowers the patch energy") {
  const Mesh mesh = build_disk_mesh(1.0, 0.5, 0.05);
  otl_test::Gen gen(6);
  const Nonlinearity nl = Nonlinearity::power_log(3.0, 2.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = gen.range(-2.0, 2.0);
    const double b = gen.range(-2.0, 2.0);
    const auto w = interpolate(mesh, [&](const Point& x) {
      return (1.0 - x.squaredNorm()) * (a * x.x() + b * std::sin(5.0 * x.y())) + 0.05 * gen.range(-1.0, 1.0);
    });
    const Point x0(gen.range(-0.3, 0.3), gen.range(-0.3, 0.3));
    const double r = gen.range(0.2, 0.5);
    const auto h = p_harmonic_replacement(mesh, nl, w, x0, r, SolverConfig{});
    const auto patch = ball_patch(mesh, x0, r);
    const auto mask = patch_interior_mask(mesh, patch);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      if (!mask[i]) CHECK(h[i] == w[i]);
    }
    const Discretization pd(mesh, nl, InterfaceData::constant(0.0), mask, patch);
    CHECK(pd.gradient_energy(h, 0.0) <= pd.gradient_energy(w, 0.0));
  }
}

TEST_CASE("replacement energy gap dominates the monotonicity bound") {
  // E(w) - E(h) >= (C_hat / p) sum |T| |D(w - h)|^p for w sharing h's
  // boundary values on the patch.
  const Mesh mesh = build_disk_mesh(1.0, 0.5, 0.05);
  const double p = 3.0;
  const Nonlinearity nl = Nonlinearity::power(p);
  const double C_hat = estimate_monotonicity_constant(nl, p, 100000, 42).C_hat;
  otl_test::Gen gen(41);
  const Point x0(0.1, 0.05);
  const double r = 0.35;
  const auto base = interpolate(mesh, [](const Point& x) { return (1.0 - x.squaredNorm()) * (1.0 + x.x()); });
  const auto h = p_harmonic_replacement(mesh, nl, base, x0, r, SolverConfig{});
  const auto patch = ball_patch(mesh, x0, r);
  const auto mask = patch_interior_mask(mesh, patch);
  const Discretization pd(mesh, nl, InterfaceData::constant(0.0), mask, patch);
  for (int trial = 0; trial < 10; ++trial) {
    const double amp = gen.log_range(1e-2, 1.0);
    std::vector<double> vals(h.values().begin(), h.values().end());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (mask[i]) vals[i] += amp * gen.range(-1.0, 1.0);
    }
    const DiscreteField w(mesh, vals);
    double rhs = 0.0;
    for (auto t : patch) rhs += mesh.area(t) * std::pow((w.gradient(t) - h.gradient(t)).norm(), p);
    rhs *= C_hat / p;
    const double gap = pd.gradient_energy(w, 0.0) - pd.gradient_energy(h, 0.0);
    CAPTURE(amp);
    CHECK(gap >= rhs);
  }
}

TEST_CASE("trace json lists every record") {
  SolverConfig cfg;
  const auto res = minimize(disk(), Nonlinearity::power(3.0), InterfaceData::constant(1.0), cfg);
  const auto path = std::filesystem::temp_directory_path() / "otl_test_trace.json";
  write_trace_json(res.trace, path, "feedfacecafebeef");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.find("\"config_hash\": \"feedfacecafebeef\"") != std::string::npos);
  std::size_t count = 0;
  for (std::size_t pos = text.find("\"stage_delta\""); pos != std::string::npos; pos = text.find("\"stage_delta\"", pos + 1)) {
    ++count;
  }
  CHECK(count == res.trace.size());
  std::filesystem::remove(path);
}
