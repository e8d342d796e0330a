#include <doctest.h>

#include <cmath>

#include "rocs/ode_sim.hpp"

using namespace rocs;

namespace {

OdeField decay_field() {
  return [](double, const Vec& y) { return Vec(-y); };
}

// Endpoint error of a fixed-step march over [0, 2]. A huge tolerance plus
// uniformly spaced mandatory outputs pins every step to the grid spacing.
// The test problem is y'' = -25 y, whose high derivatives are large enough
// to keep even ninth-order errors above the roundoff floor.
double fixed_step_error(Integrator method, int steps) {
  SimOptions opts;
  opts.method = method;
  opts.tolerance = 1e30;
  opts.initial_step = 10.0;
  std::vector<double> req;
  for (int i = 1; i < steps; ++i) req.push_back(2.0 * i / steps);
  OdeField f = [](double, const Vec& y) {
    Vec d(2);
    d << y[1], -25.0 * y[0];
    return d;
  };
  Vec y0(2);
  y0 << 1.0, 0.0;
  const auto sim = integrate(f, y0, 0.0, 2.0, req, opts);
  REQUIRE(sim.ok);
  REQUIRE(sim.steps_accepted == steps);
  REQUIRE(sim.steps_rejected == 0);
  Vec exact(2);
  exact << std::cos(10.0), -5.0 * std::sin(10.0);
  return (sim.y.row(sim.y.rows() - 1).transpose() - exact).cwiseAbs().maxCoeff();
}

OcpDefinition decay_ocp(double t0, double tf) {
  OcpDefinition ocp;
  ocp.n_x = 1;
  ocp.n_u = 0;
  ocp.dynamics = [](const Vec& x, const Vec&, double) { return Vec(-x); };
  ocp.t0_bounds = Bound::fixed_at(t0);
  ocp.tf_bounds = Bound::fixed_at(tf);
  ocp.finish();
  return ocp;
}

CollocationSolution decay_solution(Mesh mesh, double t0, double tf) {
  CollocationSolution sol;
  sol.mesh = std::move(mesh);
  sol.t0 = t0;
  sol.tf = tf;
  const int points = sol.mesh.total_colloc() + 1;
  sol.states = Mat::Zero(points, 1);
  sol.controls = Mat::Zero(sol.mesh.total_colloc(), 0);
  return sol;
}

}  // namespace

TEST_SUITE_BEGIN("ode_sim");

TEST_CASE("integrator names round trip and bad names throw") {
  CHECK(integrator_from_name("dp54") == Integrator::dp54);
  CHECK(integrator_from_name("v98") == Integrator::v98);
  CHECK(to_string(Integrator::v98) == "v98");
  CHECK_THROWS_AS(integrator_from_name("rk4"), std::invalid_argument);
}

TEST_CASE("endpoint accuracy tracks the requested tolerance") {
  for (auto method : {Integrator::dp54, Integrator::v98}) {
    SimOptions opts;
    opts.method = method;
    opts.tolerance = 1e-6;
    const auto sim = integrate(decay_field(), Vec::Ones(1), 0.0, 2.0, {}, opts);
    REQUIRE(sim.ok);
    CHECK(std::abs(sim.y(sim.y.rows() - 1, 0) - std::exp(-2.0)) <= 100.0 * opts.tolerance);
    CHECK(sim.rhs_evals > 0);
    CHECK(sim.t.front() == 0.0);
    CHECK(sim.t.back() == 2.0);
  }
}

TEST_CASE("norm-relative control keeps relative accuracy for large solutions") {
  SimOptions opts;
  opts.tolerance = 1e-8;
  const Vec y0 = Vec::Constant(1, 1e6);
  const auto sim = integrate([](double, const Vec& y) { return Vec(-y); }, y0, 0.0, 1.0,
                             {}, opts);
  REQUIRE(sim.ok);
  const double exact = 1e6 * std::exp(-1.0);
  CHECK(std::abs(sim.y(sim.y.rows() - 1, 0) - exact) / exact <= 100.0 * opts.tolerance);
}

TEST_CASE("observed convergence orders match the 5th and 9th order pairs") {
  const double e1_dp = fixed_step_error(Integrator::dp54, 64);
  const double e2_dp = fixed_step_error(Integrator::dp54, 128);
  const double order_dp = std::log2(e1_dp / e2_dp);
  CAPTURE(e1_dp);
  CAPTURE(e2_dp);
  CAPTURE(order_dp);
  CHECK(order_dp >= 4.0);
  CHECK(order_dp <= 6.0);

  const double e1_v9 = fixed_step_error(Integrator::v98, 8);
  const double e2_v9 = fixed_step_error(Integrator::v98, 16);
  const double order_v9 = std::log2(e1_v9 / e2_v9);
  CAPTURE(e1_v9);
  CAPTURE(e2_v9);
  CAPTURE(order_v9);
  CHECK(order_v9 >= 8.0);
  CHECK(order_v9 <= 10.0);
}

TEST_CASE("per-step evaluation counts are exact for clean marches") {
  SimOptions opts;
  opts.tolerance = 1e30;
  opts.initial_step = 10.0;
  std::vector<double> req = {0.5, 1.0, 1.5};
  auto sim = integrate(decay_field(), Vec::Ones(1), 0.0, 2.0, req, opts);
  REQUIRE(sim.ok);
  CHECK(sim.steps_accepted == 4);
  CHECK(sim.rhs_evals == 7 * 4);
  opts.method = Integrator::v98;
  sim = integrate(decay_field(), Vec::Ones(1), 0.0, 2.0, req, opts);
  REQUIRE(sim.ok);
  CHECK(sim.rhs_evals == 84 * 4);
}

TEST_CASE("required output points appear exactly and in order") {
  SimOptions opts;
  opts.tolerance = 1e-9;
  std::vector<double> req = {0.3, 0.31, 1.7, 0.9};
  const auto sim = integrate(decay_field(), Vec::Ones(1), 0.0, 2.0, req, opts);
  REQUIRE(sim.ok);
  for (double r : req)
    CHECK(std::count(sim.t.begin(), sim.t.end(), r) == 1);
  for (size_t i = 0; i + 1 < sim.t.size(); ++i) CHECK(sim.t[i] < sim.t[i + 1]);
  // Values at the landings are accurate, not just present.
  const auto it = std::find(sim.t.begin(), sim.t.end(), 1.7);
  const auto row = static_cast<int>(it - sim.t.begin());
  CHECK(sim.y(row, 0) == doctest::Approx(std::exp(-1.7)).epsilon(1e-6));
}

TEST_CASE("backward spans march in reverse") {
  SimOptions opts;
  opts.tolerance = 1e-9;
  const Vec y0 = Vec::Constant(1, std::exp(1.0));
  const auto sim = integrate([](double, const Vec& y) { return Vec(y); }, y0, 1.0, 0.0,
                             {0.5}, opts);
  REQUIRE(sim.ok);
  CHECK(sim.t.front() == 1.0);
  CHECK(sim.t.back() == 0.0);
  CHECK(sim.y(sim.y.rows() - 1, 0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("finite-time blowup is reported as a failure") {
  SimOptions opts;
  const auto sim = integrate([](double, const Vec& y) { return Vec(y.array().square()); },
                             Vec::Ones(1), 0.0, 2.0, {}, opts);
  CHECK_FALSE(sim.ok);
  CHECK_FALSE(sim.failure.empty());
}

TEST_CASE("step budget exhaustion is reported as a failure") {
  SimOptions opts;
  opts.max_steps = 3;
  opts.tolerance = 1e-12;
  const auto sim = integrate(decay_field(), Vec::Ones(1), 0.0, 100.0, {}, opts);
  CHECK_FALSE(sim.ok);
  CHECK(sim.failure == "step limit reached");
}

TEST_CASE("output requests outside the span are rejected") {
  SimOptions opts;
  const auto sim = integrate(decay_field(), Vec::Ones(1), 0.0, 1.0, {1.5}, opts);
  CHECK_FALSE(sim.ok);
}

TEST_CASE("control interpolant extrapolates to the noncollocated endpoint") {
  CollocationSolution sol;
  sol.mesh.points = {-1.0, 1.0};
  sol.mesh.colloc = {2};
  sol.t0 = 0.0;
  sol.tf = 1.0;
  sol.states = Mat::Zero(3, 1);
  sol.controls = Mat(2, 1);
  sol.controls << 0.0, 1.0;
  auto u = control_interpolant(sol, 0);
  // Nodes are -1 and 1/3; the straight line through (−1,0),(1/3,1) reaches
  // 1.5 at +1.
  CHECK(u.eval(1.0)(0) == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(u.eval(-1.0)(0) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("interval propagation forward from the left state") {
  const auto ocp = decay_ocp(0.0, 2.0);
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {3};
  auto sol = decay_solution(mesh, 0.0, 2.0);
  sol.states(0, 0) = 1.0;
  SimOptions opts;
  opts.tolerance = 1e-9;
  const auto sim = simulate_ivp(ocp, sol, 0, opts);
  REQUIRE(sim.ok);
  CHECK(sim.zeta[0] == -1.0);
  CHECK(sim.zeta[sim.zeta.size() - 1] == 1.0);
  CHECK(sim.y(sim.y.rows() - 1, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-7));
  // Collocation points of the three-point grid are mandatory outputs.
  const auto grid = make_grid(3);
  for (int i = 0; i < grid.n; ++i) {
    bool present = false;
    for (int j = 0; j < sim.zeta.size(); ++j)
      if (sim.zeta[j] == grid.points[i]) present = true;
    CHECK(present);
  }
  // tau equals zeta for a single interval spanning the whole domain.
  CHECK((sim.tau - sim.zeta).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("interval propagation backward from the right state") {
  const auto ocp = decay_ocp(0.0, 2.0);
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {3};
  auto sol = decay_solution(mesh, 0.0, 2.0);
  sol.states(3, 0) = std::exp(-2.0);
  SimOptions opts;
  opts.tolerance = 1e-9;
  const auto sim = simulate_tvp(ocp, sol, 0, opts);
  REQUIRE(sim.ok);
  // Rows come back sorted ascending even though the march ran in reverse.
  CHECK(sim.zeta[0] == -1.0);
  CHECK(sim.zeta[sim.zeta.size() - 1] == 1.0);
  CHECK(sim.y(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("pair trial forward covers both intervals in an extended coordinate") {
  const auto ocp = decay_ocp(0.0, 2.0);
  Mesh mesh;
  mesh.points = {-1.0, 0.0, 1.0};
  mesh.colloc = {2, 2};
  auto sol = decay_solution(mesh, 0.0, 2.0);
  sol.states(0, 0) = 1.0;
  SimOptions opts;
  opts.tolerance = 1e-10;
  const auto sim = simulate_merged_ivp(ocp, sol, 0, opts);
  REQUIRE(sim.ok);
  // Equal widths: the second interval maps to (1, 3].
  CHECK(sim.zeta[sim.zeta.size() - 1] == doctest::Approx(3.0));
  CHECK(sim.tau[sim.tau.size() - 1] == doctest::Approx(1.0));
  CHECK(sim.y(sim.y.rows() - 1, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-7));
  // The shared boundary appears exactly once.
  int hits = 0;
  for (int j = 0; j < sim.zeta.size(); ++j)
    if (std::abs(sim.zeta[j] - 1.0) < 1e-12) ++hits;
  CHECK(hits == 1);
  // Value at the boundary is the halfway decay.
  for (int j = 0; j < sim.zeta.size(); ++j)
    if (sim.zeta[j] == 1.0) CHECK(sim.y(j, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  // Right interval's collocation points arrive through the stretch map.
  const auto grid = make_grid(2);
  for (int i = 1; i < grid.n; ++i) {
    const double s = xi(grid.points[i], -1.0, 0.0, 1.0);
    bool present = false;
    for (int j = 0; j < sim.zeta.size(); ++j)
      if (std::abs(sim.zeta[j] - s) < 1e-13) present = true;
    CHECK(present);
  }
}

TEST_CASE("pair trial backward covers both intervals in an extended coordinate") {
  const auto ocp = decay_ocp(0.0, 2.0);
  Mesh mesh;
  mesh.points = {-1.0, 0.0, 1.0};
  mesh.colloc = {2, 2};
  auto sol = decay_solution(mesh, 0.0, 2.0);
  sol.states(4, 0) = std::exp(-2.0);
  SimOptions opts;
  opts.tolerance = 1e-10;
  const auto sim = simulate_merged_tvp(ocp, sol, 0, opts);
  REQUIRE(sim.ok);
  CHECK(sim.zeta[0] == doctest::Approx(-3.0));
  CHECK(sim.tau[0] == doctest::Approx(-1.0));
  CHECK(sim.y(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sim.zeta[sim.zeta.size() - 1] == 1.0);
}

TEST_CASE("the two methods agree on a smooth problem") {
  SimOptions a, b;
  a.method = Integrator::dp54;
  a.tolerance = 1e-10;
  b.method = Integrator::v98;
  b.tolerance = 1e-10;
  OdeField f = [](double t, const Vec& y) {
    Vec d(2);
    d << y[1], -std::sin(y[0]) + 0.1 * std::cos(t);
    return d;
  };
  Vec y0(2);
  y0 << 0.3, 0.0;
  const auto sa = integrate(f, y0, 0.0, 5.0, {}, a);
  const auto sb = integrate(f, y0, 0.0, 5.0, {}, b);
  REQUIRE(sa.ok);
  REQUIRE(sb.ok);
  const Vec va = sa.y.row(sa.y.rows() - 1), vb = sb.y.row(sb.y.rows() - 1);
  CHECK((va - vb).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_SUITE_END();
