#include "rocs/error_estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace rocs {

DirectionPolicy direction_from_name(const std::string& name) {
  if (name == "both") return DirectionPolicy::both;
  if (name == "forward") return DirectionPolicy::forward_only;
  if (name == "backward") return DirectionPolicy::backward_only;
  if (name == "auto") return DirectionPolicy::auto_policy;
  throw std::invalid_argument("unknown direction policy '" + name +
                              "' (expected both, forward, backward, or auto)");
}

std::string to_string(DirectionPolicy policy) {
  switch (policy) {
    case DirectionPolicy::both: return "both";
    case DirectionPolicy::forward_only: return "forward";
    case DirectionPolicy::backward_only: return "backward";
    default: return "auto";
  }
}

double ErrorReport::max_error() const {
  double worst = 0.0;
  for (const auto& info : intervals)
    if (info.usable()) worst = std::max(worst, info.e_max);
  return worst;
}

bool ErrorReport::any_estimation_failure() const {
  for (const auto& info : intervals)
    if (!info.usable()) return true;
  return intervals.empty();
}

Vec scaling_factors(const CollocationSolution& sol) {
  if (sol.states.rows() == 0) throw std::invalid_argument("empty solution");
  if (!sol.states.allFinite())
    throw std::invalid_argument("non-finite state values in solution");
  Vec gamma(sol.states.cols());
  for (int i = 0; i < sol.states.cols(); ++i)
    gamma[i] = 1.0 / (1.0 + sol.states.col(i).cwiseAbs().maxCoeff());
  return gamma;
}

namespace {

// Max over propagation points of the scaled gap between a trajectory and an
// interpolant evaluated through `local` (maps the trajectory coordinate to
// the interpolant's argument).
template <typename MapFn>
double trace_error(const IntervalSim& sim, const Interpolant& interp, const Vec& gamma,
                   const MapFn& local) {
  double worst = 0.0;
  for (int j = 0; j < sim.zeta.size(); ++j) {
    const Eigen::RowVectorXd x = interp.eval(local(sim.zeta[j]));
    for (int i = 0; i < gamma.size(); ++i)
      worst = std::max(worst, gamma[i] * std::abs(sim.y(j, i) - x(i)));
  }
  return worst;
}

}  // namespace

IntervalErrorInfo interval_error_info(const CollocationSolution& sol, int k,
                                      const IntervalSim* fwd, const IntervalSim* bwd,
                                      const Vec& gamma) {
  IntervalErrorInfo info;
  const Interpolant interp = state_interpolant(sol, k);
  auto ident = [](double z) { return z; };
  if (fwd) {
    if (fwd->ok) {
      info.forward_ok = true;
      info.e_forward = trace_error(*fwd, interp, gamma, ident);
    } else {
      info.forward_failure = fwd->failure;
    }
  }
  if (bwd) {
    if (bwd->ok) {
      info.backward_ok = true;
      info.e_backward = trace_error(*bwd, interp, gamma, ident);
    } else {
      info.backward_failure = bwd->failure;
    }
  }
  info.e_max = std::max(info.forward_ok ? info.e_forward : 0.0,
                        info.backward_ok ? info.e_backward : 0.0);
  return info;
}

double interval_error(const CollocationSolution& sol, int k, const IntervalSim& fwd,
                      const IntervalSim& bwd, const Vec& gamma) {
  const auto info = interval_error_info(sol, k, &fwd, &bwd, gamma);
  if (!info.usable())
    throw std::runtime_error("no usable propagated trajectory for the interval");
  return info.e_max;
}

double merged_pair_error(const CollocationSolution& sol, int k,
                         const IntervalSim* fwd, const IntervalSim* bwd,
                         const Vec& gamma) {
  const double tkm1 = sol.mesh.points[k], tk = sol.mesh.points[k + 1],
               tkp1 = sol.mesh.points[k + 2];
  const Interpolant left = state_interpolant(sol, k);
  const Interpolant right = state_interpolant(sol, k + 1);
  double worst = 0.0;
  bool any = false;
  if (fwd) {
    if (!fwd->ok) return kInf;
    any = true;
    for (int j = 0; j < fwd->zeta.size(); ++j) {
      const double s = fwd->zeta[j];
      const Eigen::RowVectorXd x =
          s <= 1.0 ? left.eval(s) : right.eval(chi(s, tkm1, tk, tkp1));
      for (int i = 0; i < gamma.size(); ++i)
        worst = std::max(worst, gamma[i] * std::abs(fwd->y(j, i) - x(i)));
    }
  }
  if (bwd) {
    if (!bwd->ok) return kInf;
    any = true;
    for (int j = 0; j < bwd->zeta.size(); ++j) {
      const double s = bwd->zeta[j];
      const Eigen::RowVectorXd x =
          s >= -1.0 ? right.eval(s) : left.eval(xi(s, tkm1, tk, tkp1));
      for (int i = 0; i < gamma.size(); ++i)
        worst = std::max(worst, gamma[i] * std::abs(bwd->y(j, i) - x(i)));
    }
  }
  if (!any) return kInf;
  return worst;
}

double residual_error(const OcpDefinition& ocp, const CollocationSolution& sol, int k) {
  const Vec gamma = scaling_factors(sol);
  const int nk = sol.mesh.colloc[k];
  const auto dense = make_grid(nk + 1);
  const Interpolant interp = state_interpolant(sol, k);
  const Interpolant u = control_interpolant(sol, k);
  const double a = sol.mesh.points[k], b = sol.mesh.points[k + 1];
  const double rate = sol.alpha() * sol.mesh.half_width(k);
  double worst = 0.0;
  for (int j = 0; j < dense.n; ++j) {
    const double z = dense.points[j];
    const double tau = zeta_to_tau(z, a, b);
    const Eigen::RowVectorXd deriv = interp.deriv(z);
    const Vec f = ocp.dynamics(interp.eval(z).transpose(), u.eval(z).transpose(), tau);
    for (int i = 0; i < gamma.size(); ++i)
      worst = std::max(worst, gamma[i] * std::abs(deriv(i) - rate * f[i]));
  }
  return worst;
}

}  // namespace rocs
