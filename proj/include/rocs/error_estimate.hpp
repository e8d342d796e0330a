#pragma once

#include <string>
#include <vector>

#include "rocs/ode_sim.hpp"

namespace rocs {

enum class DirectionPolicy { both, forward_only, backward_only, auto_policy };

DirectionPolicy direction_from_name(const std::string& name);
std::string to_string(DirectionPolicy policy);

/// Per-interval outcome of comparing propagated trajectories against the
/// collocated interpolant. A direction that was skipped or failed carries a
/// negative error value and its failure text.
struct IntervalErrorInfo {
  double e_max = 0.0;
  double e_forward = -1.0;
  double e_backward = -1.0;
  bool forward_ok = false;
  bool backward_ok = false;
  std::string forward_failure;
  std::string backward_failure;
  bool usable() const { return forward_ok || backward_ok; }
};

struct ErrorReport {
  Vec gamma;
  std::vector<IntervalErrorInfo> intervals;
  DirectionPolicy policy = DirectionPolicy::both;  // effective, after any skip
  bool forward_skipped = false;
  bool backward_skipped = false;
  std::string forward_skip_reason;
  std::string backward_skip_reason;

  double max_error() const;
  /// True when some interval has no usable direction at all.
  bool any_estimation_failure() const;
};

/// Global state scaling: gamma_i = 1 / (1 + max |X_i|) over every grid point
/// of the solution.
Vec scaling_factors(const CollocationSolution& sol);

/// Richer form used by the driver; null trajectory pointers mean the
/// direction was not run.
IntervalErrorInfo interval_error_info(const CollocationSolution& sol, int k,
                                      const IntervalSim* fwd, const IntervalSim* bwd,
                                      const Vec& gamma);

/// Maximum scaled deviation between the interval's interpolant and the
/// supplied propagated trajectories. Throws if neither direction is usable.
double interval_error(const CollocationSolution& sol, int k, const IntervalSim& fwd,
                      const IntervalSim& bwd, const Vec& gamma);

/// Error of a trial propagation across intervals k and k+1. Trajectories use
/// the extended coordinates produced by simulate_merged_ivp/tvp. A failed
/// (non-null, not ok) trajectory makes the pair unmergeable: returns +inf.
double merged_pair_error(const CollocationSolution& sol, int k,
                         const IntervalSim* fwd, const IntervalSim* bwd,
                         const Vec& gamma);

/// Diagnostic: max scaled defect of the interpolant's derivative against the
/// dynamics, sampled on a denser quadrature grid of N_k + 1 points.
double residual_error(const OcpDefinition& ocp, const CollocationSolution& sol, int k);

}  // namespace rocs
