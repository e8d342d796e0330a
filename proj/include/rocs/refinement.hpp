#pragma once

#include <utility>
#include <vector>

#include "rocs/error_estimate.hpp"
#include "rocs/nlp_solver.hpp"

namespace rocs {

struct RefinementOptions {
  int n_min = 2;
  int n_max = 6;
  double mesh_tolerance = 1e-6;
  int max_iterations = 40;
  SimOptions sim;
  DirectionPolicy direction = DirectionPolicy::auto_policy;
  SolverOptions nlp;
  std::function<void(const std::string&)> log;

  void validate() const;  // throws on inconsistent limits
};

enum class ActionKind { none, p_refine, h_refine, merge_with_next, p_reduce };

struct IntervalAction {
  ActionKind kind = ActionKind::none;
  int amount = 0;  // added points, split count, or removed points
};

struct RefinementPlan {
  std::vector<IntervalAction> actions;  // one per current interval
  Mesh next_mesh;
  std::vector<std::pair<int, double>> merged_pairs;  // (left interval, pair error)
};

/// Number of collocation points to add when the interval error exceeds the
/// tolerance: ceil(log10(e_max / eps)), at least 1.
int p_refine_count(double e_max, double eps);

/// Mesh points of a uniform split into max(2, ceil(n_next / n_min))
/// subintervals; includes both endpoints.
std::vector<double> h_refine_split(int n_next, int n_min, double tau_left,
                                   double tau_right);

/// Number of collocation points to remove when the interval error is within
/// tolerance: floor(log10((eps / e_max)^(1/delta))) with
/// delta = n_min + n_max - n_k. Zero error is clamped to 1e-16 first.
int p_reduce_count(double e_max, double eps, int n_k, int n_min, int n_max);

/// Greedy non-overlapping merge selection among candidate pairs whose trial
/// error is within tolerance, in ascending order of
/// max(e_k, e_{k+1}, pair error); ties go to the lower index.
std::vector<std::pair<int, double>> plan_merges(
    const ErrorReport& report, const std::vector<std::pair<int, double>>& merged_errors,
    double eps);

/// One round of the refinement ladder: grow, split, merge, or shrink each
/// interval, producing the next mesh.
RefinementPlan refine(const Mesh& mesh, const ErrorReport& report,
                      const std::vector<std::pair<int, double>>& merged_errors,
                      const RefinementOptions& opts);

}  // namespace rocs
