#include <doctest.h>

#include <cmath>

#include "rocs/driver.hpp"
#include "rocs/problems.hpp"

using namespace rocs;

namespace {

// Minimum-energy steering: x' = u, x(0) = 0, x(2) = 1, J = integral of u^2.
// Optimal control is the constant 1/2, state is linear, so a single low-order
// interval already represents the solution exactly.
OcpDefinition steering_problem() {
  OcpDefinition ocp;
  ocp.name = "steering";
  ocp.n_x = 1;
  ocp.n_u = 1;
  ocp.dynamics = [](const Vec&, const Vec& u, double) { return u; };
  ocp.lagrange = [](const Vec&, const Vec& u, double) { return u[0] * u[0]; };
  ocp.n_b = 2;
  ocp.boundary = [](const Vec& x0, double, const Vec& xf, double) {
    Vec r(2);
    r << x0[0], xf[0] - 1.0;
    return r;
  };
  ocp.t0_bounds = Bound::fixed_at(0.0);
  ocp.tf_bounds = Bound::fixed_at(2.0);
  ocp.x0_value = {0.0};
  ocp.xf_value = {1.0};
  ocp.finish();
  return ocp;
}

// x' = -2x on t in [0, 2], maximize x(tf); one 2-point interval cannot
// represent the exponential tightly, so refinement has work to do.
OcpDefinition decay_problem() {
  OcpDefinition ocp;
  ocp.name = "decay";
  ocp.n_x = 1;
  ocp.n_u = 0;
  ocp.dynamics = [](const Vec& x, const Vec&, double) {
    Vec dx(1);
    dx << -2.0 * x[0];
    return dx;
  };
  ocp.mayer = [](const Vec&, double, const Vec& xf, double) { return -xf[0]; };
  ocp.n_b = 1;
  ocp.boundary = [](const Vec& x0, double, const Vec&, double) {
    Vec r(1);
    r << x0[0] - 1.0;
    return r;
  };
  ocp.t0_bounds = Bound::fixed_at(0.0);
  ocp.tf_bounds = Bound::fixed_at(2.0);
  ocp.x0_value = {1.0};
  ocp.finish();
  return ocp;
}

RefinementOptions quiet_options() {
  RefinementOptions opts;
  opts.sim.tolerance = 1e-9;
  return opts;
}

}  // namespace

TEST_SUITE_BEGIN("driver");

TEST_CASE("run status names") {
  CHECK(to_string(RunStatus::converged) == "converged");
  CHECK(to_string(RunStatus::max_iterations) == "max_iterations");
  CHECK(to_string(RunStatus::solver_failure) == "solver_failure");
}

TEST_CASE("polynomial-exact problem converges on the first iteration") {
  const OcpDefinition ocp = steering_problem();
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {3};
  const RunResult out = run_adaptive(ocp, mesh, quiet_options());

  REQUIRE(out.has_solution);
  CHECK(out.status == RunStatus::converged);
  REQUIRE(out.history.size() == 1);
  CHECK(out.history[0].iteration == 0);
  CHECK(out.history[0].e_max <= 1e-6);
  CHECK(out.history[0].nlp_status == "optimal");
  // J = integral of (1/2)^2 over [0, 2] = 1/2.
  CHECK(out.solution.objective == doctest::Approx(0.5).epsilon(1e-6));
  // The mesh never changed.
  CHECK(out.solution.mesh.points == mesh.points);
  CHECK(out.solution.mesh.colloc == mesh.colloc);
}

TEST_CASE("warm start onto the same layout reproduces the solved point") {
  const OcpDefinition ocp = steering_problem();
  Mesh mesh;
  mesh.points = {-1.0, -0.2, 0.4, 1.0};
  mesh.colloc = {3, 2, 4};
  const Transcription tr = assemble(ocp, mesh);
  const SolveOutcome nlp = solve(tr.nlp, initial_guess(ocp, tr.layout));
  REQUIRE(nlp.status == SolveStatus::optimal);
  const CollocationSolution sol = extract(ocp, tr.layout, nlp.z);

  const Vec z = warm_start(sol, tr.layout);
  REQUIRE(z.size() == tr.layout.dimension);
  // Interpolation nodes coincide with the stored samples, so the mapped
  // vector matches the solved one up to rounding.
  CHECK((z - nlp.z).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("warm start maps a linear solution exactly onto a finer mesh") {
  const OcpDefinition ocp = steering_problem();
  Mesh coarse;
  coarse.points = {-1.0, 1.0};
  coarse.colloc = {3};
  const Transcription ct = assemble(ocp, coarse);
  const SolveOutcome nlp = solve(ct.nlp, initial_guess(ocp, ct.layout));
  REQUIRE(nlp.status == SolveStatus::optimal);
  const CollocationSolution sol = extract(ocp, ct.layout, nlp.z);

  Mesh fine;
  fine.points = {-1.0, 0.0, 0.5, 1.0};
  fine.colloc = {4, 3, 2};
  const Transcription ft = assemble(ocp, fine);
  const Vec z = warm_start(sol, ft.layout);

  // State x(tau) = (tau + 1)/2 and control u = 1/2 are both polynomial, so
  // every mapped sample lands on the analytic solution.
  for (int k = 0; k < fine.intervals(); ++k) {
    const auto grid = make_grid(fine.colloc[k]);
    for (int i = 0; i < grid.n; ++i) {
      const int p = ft.layout.first_point[k] + i;
      const double tau =
          zeta_to_tau(grid.points[i], fine.points[k], fine.points[k + 1]);
      CHECK(z[ft.layout.state_index(p, 0)] ==
            doctest::Approx((tau + 1.0) / 2.0).epsilon(1e-8));
      CHECK(z[ft.layout.control_index(p, 0)] == doctest::Approx(0.5).epsilon(1e-6));
    }
  }
  CHECK(z[ft.layout.state_index(ft.layout.n_state_points - 1, 0)] ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("infeasible boundary conditions surface as solver_failure") {
  OcpDefinition ocp = steering_problem();
  // x(0) = 0 and x(0) = 1 simultaneously.
  ocp.n_b = 3;
  ocp.boundary = [](const Vec& x0, double, const Vec& xf, double) {
    Vec r(3);
    r << x0[0], x0[0] - 1.0, xf[0] - 1.0;
    return r;
  };
  ocp.boundary_lower = Vec();
  ocp.boundary_upper = Vec();
  ocp.finish();
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {3};
  RefinementOptions opts = quiet_options();
  opts.nlp.max_iterations = 60;
  const RunResult out = run_adaptive(ocp, mesh, opts);
  CHECK(out.status == RunStatus::solver_failure);
  CHECK(!out.message.empty());
  CHECK(!out.has_solution);
  REQUIRE(out.history.size() == 1);
  CHECK(out.history[0].nlp_status != "optimal");
}

TEST_CASE("iteration budget exhaustion is reported as max_iterations") {
  const OcpDefinition ocp = decay_problem();
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {2};
  RefinementOptions opts = quiet_options();
  opts.max_iterations = 1;  // the coarse mesh cannot converge in one pass
  opts.mesh_tolerance = 1e-9;
  const RunResult out = run_adaptive(ocp, mesh, opts);
  CHECK(out.status == RunStatus::max_iterations);
  CHECK(out.has_solution);
  CHECK(out.history.size() == 1);
  CHECK(out.history[0].e_max > opts.mesh_tolerance);
}

TEST_CASE("initial mesh outside the degree window is rejected") {
  const OcpDefinition ocp = steering_problem();
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {9};
  RefinementOptions opts = quiet_options();
  opts.n_min = 2;
  opts.n_max = 6;
  CHECK_THROWS_AS(run_adaptive(ocp, mesh, opts), std::invalid_argument);
}

TEST_CASE("exponential decay refines until the propagation error passes") {
  const OcpDefinition ocp = decay_problem();
  Mesh mesh;
  mesh.points = {-1.0, 1.0};
  mesh.colloc = {2};
  RefinementOptions opts = quiet_options();
  opts.mesh_tolerance = 1e-7;
  const RunResult out = run_adaptive(ocp, mesh, opts);

  REQUIRE(out.has_solution);
  CHECK(out.status == RunStatus::converged);
  CHECK(out.history.size() > 1);
  CHECK(out.report.max_error() <= opts.mesh_tolerance);
  // x(tf) = exp(-4).
  CHECK(out.solution.states(out.solution.states.rows() - 1, 0) ==
        doctest::Approx(std::exp(-4.0)).epsilon(1e-6));
  // History iterations number consecutively and track the mesh they solved.
  for (size_t m = 0; m < out.history.size(); ++m) {
    CHECK(out.history[m].iteration == static_cast<int>(m));
    CHECK(out.history[m].intervals ==
          static_cast<int>(out.history[m].interval_errors.size()));
  }
  CHECK(out.history.back().e_max < out.history.front().e_max);
}

TEST_CASE("history carries per-interval errors matching the final report") {
  const OcpDefinition ocp = steering_problem();
  Mesh mesh;
  mesh.points = {-1.0, 0.0, 1.0};
  mesh.colloc = {2, 3};
  const RunResult out = run_adaptive(ocp, mesh, quiet_options());
  REQUIRE(out.status == RunStatus::converged);
  const MeshIteration& last = out.history.back();
  REQUIRE(last.interval_errors.size() == out.report.intervals.size());
  for (size_t k = 0; k < out.report.intervals.size(); ++k)
    CHECK(last.interval_errors[k] == doctest::Approx(out.report.intervals[k].e_max));
  CHECK(last.residual_max >= 0.0);
  CHECK(last.wall_seconds >= 0.0);
}

TEST_SUITE_END();
