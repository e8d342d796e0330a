#pragma once

#include <string>
#include <vector>

#include "rocs/refinement.hpp"
#include "rocs/transcription.hpp"

namespace rocs {

enum class RunStatus { converged, max_iterations, solver_failure };
std::string to_string(RunStatus status);

/// One refinement iteration as recorded for reports and mesh history plots.
struct MeshIteration {
  int iteration = 0;
  Mesh mesh;
  int total_colloc = 0;
  int intervals = 0;
  double e_max = -1.0;
  double residual_max = -1.0;
  double objective = 0.0;
  std::string nlp_status;
  int nlp_iterations = 0;
  double wall_seconds = 0.0;
  std::vector<double> interval_errors;  // -1 marks a failed estimate
};

struct RunResult {
  RunStatus status = RunStatus::solver_failure;
  std::string message;
  bool has_solution = false;
  CollocationSolution solution;  // last successfully solved iterate
  ErrorReport report;            // error report for that iterate
  std::vector<MeshIteration> history;
};

/// Map a previous solution onto a new layout's decision vector through the
/// per-interval state and control interpolants.
Vec warm_start(const CollocationSolution& prev, const DecisionLayout& layout);

/// The adaptive loop: solve, propagate, estimate, refine, repeat until every
/// interval error is within tolerance or the iteration budget runs out.
RunResult run_adaptive(const OcpDefinition& ocp, const Mesh& initial_mesh,
                       const RefinementOptions& opts);

}  // namespace rocs
