#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rocs/lgr_basis.hpp"
#include "rocs/ocp.hpp"
#include "rocs/transcription.hpp"

namespace rocs {

enum class Integrator { dp54, v98 };

Integrator integrator_from_name(const std::string& name);
std::string to_string(Integrator method);

struct SimOptions {
  Integrator method = Integrator::dp54;
  double tolerance = 1e-6;  // local error per step, relative to solution size
  int max_steps = 200000;
  double initial_step = 0.0;  // 0 picks a fraction of the span
};

using OdeField = std::function<Vec(double t, const Vec& y)>;

/// Result of one adaptive march. Abscissae are listed in march order and
/// include both span ends plus every requested output point.
struct SimResult {
  bool ok = false;
  std::string failure;
  std::vector<double> t;
  Mat y;  // one row per abscissa
  int steps_accepted = 0;
  int steps_rejected = 0;
  int rhs_evals = 0;
};

/// March from span_begin to span_end (either direction). Accepted steps are
/// clamped so the trajectory lands exactly on each entry of `required`;
/// entries must lie strictly inside the span.
SimResult integrate(const OdeField& f, const Vec& y0, double span_begin,
                    double span_end, const std::vector<double>& required,
                    const SimOptions& opts);

/// Control interpolant for interval k, built on the collocation points only;
/// evaluating at the noncollocated right endpoint extrapolates.
Interpolant control_interpolant(const CollocationSolution& sol, int k);

/// Propagation through one interval (or a trial pair) in local coordinates.
/// Rows are sorted ascending in zeta regardless of march direction.
struct IntervalSim {
  bool ok = false;
  std::string failure;
  Vec zeta;  // local coordinate of the interval (extended for pair trials)
  Vec tau;   // the same abscissae on the global scale
  Mat y;
};

IntervalSim simulate_ivp(const OcpDefinition& ocp, const CollocationSolution& sol,
                         int k, const SimOptions& opts);
IntervalSim simulate_tvp(const OcpDefinition& ocp, const CollocationSolution& sol,
                         int k, const SimOptions& opts);

/// Trial propagation across intervals k and k+1 as if they were one.
/// The forward trial runs in interval k's coordinate extended past +1 with
/// interval k's control interpolant extrapolated over the whole span; the
/// backward trial mirrors this from interval k+1.
IntervalSim simulate_merged_ivp(const OcpDefinition& ocp,
                                const CollocationSolution& sol, int k,
                                const SimOptions& opts);
IntervalSim simulate_merged_tvp(const OcpDefinition& ocp,
                                const CollocationSolution& sol, int k,
                                const SimOptions& opts);

}  // namespace rocs
