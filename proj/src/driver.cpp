#include "rocs/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace rocs {

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max_iterations";
    default: return "solver_failure";
  }
}

namespace {

// Interval of the old mesh containing tau; boundary points resolve leftward.
int containing_interval(const Mesh& mesh, double tau) {
  const auto& p = mesh.points;
  const auto it = std::upper_bound(p.begin(), p.end(), tau);
  int k = static_cast<int>(it - p.begin()) - 1;
  return std::clamp(k, 0, mesh.intervals() - 1);
}

}  // namespace

Vec warm_start(const CollocationSolution& prev, const DecisionLayout& layout) {
  const int K = layout.mesh.intervals();
  Vec z = Vec::Zero(layout.dimension);
  std::vector<Interpolant> state_interp, control_interp;
  state_interp.reserve(prev.mesh.intervals());
  for (int j = 0; j < prev.mesh.intervals(); ++j) {
    state_interp.push_back(state_interpolant(prev, j));
    control_interp.push_back(control_interpolant(prev, j));
  }
  auto old_coord = [&](double tau, int& j) {
    j = containing_interval(prev.mesh, tau);
    return tau_to_zeta(tau, prev.mesh.points[j], prev.mesh.points[j + 1]);
  };
  for (int k = 0; k < K; ++k) {
    const auto grid = make_grid(layout.mesh.colloc[k]);
    const double a = layout.mesh.points[k], b = layout.mesh.points[k + 1];
    for (int i = 0; i < grid.n; ++i) {
      const int point = layout.first_point[k] + i;
      // The first node sits at zeta = -1; take the mesh point itself so a
      // boundary shared with the old mesh resolves to the interval whose
      // control interpolant actually has a node there.
      const double tau = i == 0 ? a : zeta_to_tau(grid.points[i], a, b);
      int j;
      const double zl = old_coord(tau, j);
      const Eigen::RowVectorXd xs = state_interp[j].eval(zl);
      for (int c = 0; c < layout.n_x; ++c) z[layout.state_index(point, c)] = xs(c);
      const Eigen::RowVectorXd us = control_interp[j].eval(zl);
      for (int c = 0; c < layout.n_u; ++c) z[layout.control_index(point, c)] = us(c);
    }
  }
  {
    const int last = layout.n_state_points - 1;
    const int j = prev.mesh.intervals() - 1;
    const Eigen::RowVectorXd xs = state_interp[j].eval(1.0);
    for (int c = 0; c < layout.n_x; ++c) z[layout.state_index(last, c)] = xs(c);
  }
  if (layout.t0_index >= 0) z[layout.t0_index] = prev.t0;
  if (layout.tf_index >= 0) z[layout.tf_index] = prev.tf;
  return z;
}

RunResult run_adaptive(const OcpDefinition& ocp, const Mesh& initial_mesh,
                       const RefinementOptions& opts) {
  opts.validate();
  initial_mesh.validate();
  for (int n : initial_mesh.colloc)
    if (n < opts.n_min || n > opts.n_max)
      throw std::invalid_argument("initial mesh collocation count outside [n_min, n_max]");

  auto log = [&](const std::string& line) {
    if (opts.log) opts.log(line);
  };

  RunResult result;
  Mesh mesh = initial_mesh;
  bool run_fwd = opts.direction == DirectionPolicy::both ||
                 opts.direction == DirectionPolicy::forward_only ||
                 opts.direction == DirectionPolicy::auto_policy;
  bool run_bwd = opts.direction == DirectionPolicy::both ||
                 opts.direction == DirectionPolicy::backward_only ||
                 opts.direction == DirectionPolicy::auto_policy;
  std::string fwd_skip_reason, bwd_skip_reason;
  if (!run_fwd) fwd_skip_reason = "disabled by configuration";
  if (!run_bwd) bwd_skip_reason = "disabled by configuration";

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const auto tick = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - tick)
          .count();
    };

    const Transcription tr = assemble(ocp, mesh);
    const Vec z0 = result.has_solution ? warm_start(result.solution, tr.layout)
                                       : initial_guess(ocp, tr.layout);
    const SolveOutcome nlp = solve(tr.nlp, z0, opts.nlp);

    MeshIteration rec;
    rec.iteration = iter;
    rec.mesh = mesh;
    rec.total_colloc = mesh.total_colloc();
    rec.intervals = mesh.intervals();
    rec.nlp_status = to_string(nlp.status);
    rec.nlp_iterations = nlp.iterations;

    if (nlp.status != SolveStatus::optimal) {
      rec.wall_seconds = elapsed();
      result.history.push_back(std::move(rec));
      result.status = RunStatus::solver_failure;
      std::ostringstream msg;
      msg << "NLP solve failed on iteration " << iter << ": " << to_string(nlp.status)
          << " (violation " << nlp.constraint_violation << ", stationarity "
          << nlp.kkt_residual << ")";
      result.message = msg.str();
      log(result.message);
      return result;
    }

    CollocationSolution sol = extract(ocp, tr.layout, nlp.z);
    rec.objective = sol.objective;
    const Vec gamma = scaling_factors(sol);
    const int K = mesh.intervals();

    std::vector<IntervalSim> fwd(K), bwd(K);
    for (int k = 0; k < K; ++k) {
      if (run_fwd) fwd[k] = simulate_ivp(ocp, sol, k, opts.sim);
      if (run_bwd) bwd[k] = simulate_tvp(ocp, sol, k, opts.sim);
    }

    if (iter == 0 && opts.direction == DirectionPolicy::auto_policy) {
      auto first_failure = [&](const std::vector<IntervalSim>& sims) {
        for (int k = 0; k < K; ++k)
          if (!sims[k].ok) {
            std::ostringstream os;
            os << "interval " << k << ": " << sims[k].failure;
            return os.str();
          }
        return std::string();
      };
      const std::string ff = first_failure(fwd);
      const std::string bf = first_failure(bwd);
      if (!ff.empty() && bf.empty()) {
        run_fwd = false;
        fwd_skip_reason = "ivp_failed (" + ff + ")";
        log("dropping forward propagation: " + fwd_skip_reason);
      } else if (!bf.empty() && ff.empty()) {
        run_bwd = false;
        bwd_skip_reason = "tvp_failed (" + bf + ")";
        log("dropping backward propagation: " + bwd_skip_reason);
      }
    }

    ErrorReport report;
    report.gamma = gamma;
    report.forward_skipped = !run_fwd;
    report.backward_skipped = !run_bwd;
    report.forward_skip_reason = fwd_skip_reason;
    report.backward_skip_reason = bwd_skip_reason;
    report.policy = run_fwd && run_bwd
                        ? DirectionPolicy::both
                        : (run_fwd ? DirectionPolicy::forward_only
                                   : DirectionPolicy::backward_only);
    for (int k = 0; k < K; ++k)
      report.intervals.push_back(interval_error_info(
          sol, k, run_fwd ? &fwd[k] : nullptr, run_bwd ? &bwd[k] : nullptr, gamma));

    double resid = 0.0;
    for (int k = 0; k < K; ++k) resid = std::max(resid, residual_error(ocp, sol, k));
    rec.residual_max = resid;
    rec.e_max = report.max_error();
    for (const auto& info : report.intervals)
      rec.interval_errors.push_back(info.usable() ? info.e_max : -1.0);

    result.solution = std::move(sol);
    result.report = report;
    result.has_solution = true;

    const bool converged =
        !report.any_estimation_failure() && report.max_error() <= opts.mesh_tolerance;
    {
      std::ostringstream os;
      os << "iteration " << iter << ": K=" << rec.intervals << " N=" << rec.total_colloc
         << " objective=" << rec.objective << " e_max=" << rec.e_max
         << " residual=" << rec.residual_max << " nlp_iters=" << rec.nlp_iterations;
      log(os.str());
    }

    if (converged) {
      rec.wall_seconds = elapsed();
      result.history.push_back(std::move(rec));
      result.status = RunStatus::converged;
      result.message = "every interval error within tolerance";
      return result;
    }
    if (iter + 1 >= opts.max_iterations) {
      rec.wall_seconds = elapsed();
      result.history.push_back(std::move(rec));
      result.status = RunStatus::max_iterations;
      result.message = "iteration budget exhausted before the mesh converged";
      return result;
    }

    // Merge trials for adjacent quiet pairs.
    std::vector<std::pair<int, double>> pair_errors;
    for (int k = 0; k + 1 < K; ++k) {
      const auto& a = report.intervals[k];
      const auto& b = report.intervals[k + 1];
      if (!a.usable() || !b.usable()) continue;
      if (a.e_max > opts.mesh_tolerance || b.e_max > opts.mesh_tolerance) continue;
      IntervalSim mf, mb;
      if (run_fwd) mf = simulate_merged_ivp(ocp, result.solution, k, opts.sim);
      if (run_bwd) mb = simulate_merged_tvp(ocp, result.solution, k, opts.sim);
      const double ebar =
          merged_pair_error(result.solution, k, run_fwd ? &mf : nullptr,
                            run_bwd ? &mb : nullptr, gamma);
      pair_errors.emplace_back(k, ebar);
    }

    const RefinementPlan plan = refine(mesh, report, pair_errors, opts);
    rec.wall_seconds = elapsed();
    result.history.push_back(std::move(rec));
    mesh = plan.next_mesh;
  }
  return result;  // unreachable: the loop always returns
}

}  // namespace rocs
