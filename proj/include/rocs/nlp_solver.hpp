#pragma once

#include <cmath>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "rocs/transcription.hpp"

namespace rocs {

struct SolverOptions {
  double kkt_tolerance = 1e-8;          ///< scaled stationarity target
  double feasibility_tolerance = 1e-8;  ///< row violation target, inf norm
  int max_iterations = 300;
  double fd_step = std::cbrt(2.220446049250313e-16);  ///< relative FD step
  double penalty_init = 10.0;
  int verbosity = 0;
  std::ostream* log = nullptr;  ///< per-iteration lines when verbosity > 0
  bool keep_trace = false;
};

enum class SolveStatus { optimal, max_iterations, line_search_failure, failed };

const char* to_string(SolveStatus s);

struct IterationRecord {
  int iter = 0;
  double objective = 0, violation = 0, merit = 0, step = 0, penalty = 0, kkt = 0;
};

struct SolveOutcome {
  Vec z;
  double objective = 0.0;
  /// Stationarity residual, inf norm, measured relative to the multiplier
  /// scale max(1, |lambda|_inf, |bound duals|_inf). An absolute residual is
  /// meaningless across problems whose constraint rows differ by orders of
  /// magnitude; the relative form is what mature SQP codes report.
  double kkt_residual = kInf;
  double constraint_violation = kInf;  ///< row bound violation, inf norm
  SolveStatus status = SolveStatus::failed;
  int iterations = 0;
  Vec multipliers;  ///< row multipliers at the final iterate
  std::vector<IterationRecord> trace;
};

/// Column coloring of a sparsity pattern; columns sharing a row never share
/// a color, so one perturbed evaluation recovers every column of a color.
struct JacobianSparsity {
  int m = 0, n = 0;
  std::vector<std::pair<int, int>> entries;
  std::vector<int> color_of;  ///< per column, -1 for columns without entries
  int n_colors = 0;
  std::vector<std::vector<int>> rows_of_col;
};

JacobianSparsity analyze_pattern(int m, int n, std::vector<std::pair<int, int>> entries);

/// Central-difference Jacobian restricted to the pattern, with per-column
/// steps fd_step * (1 + |z_i|) clipped one-sidedly at the variable bounds.
/// `base` must be constraints(z).
Eigen::SparseMatrix<double> fd_jacobian(const NlpProblem& nlp, const Vec& z, const Vec& base,
                                        const JacobianSparsity& sp, double fd_step);

/// Central-difference gradient with the same bound-aware stepping.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& z, const Vec& lower,
                const Vec& upper, double fd_step);

/// Sequential quadratic programming with an l1 penalty line search, damped
/// BFGS curvature, and elastic interior-point QP subproblems. Never reports
/// optimal unless the scaled stationarity residual is at or below
/// options.kkt_tolerance and the violation at or below
/// options.feasibility_tolerance. Throws std::invalid_argument for
/// non-positive tolerances or max_iterations < 1.
SolveOutcome solve(const NlpProblem& nlp, const Vec& z0, const SolverOptions& options = {});

}  // namespace rocs
