#pragma once

#include <utility>
#include <vector>

#include "rocs/lgr_basis.hpp"
#include "rocs/ocp.hpp"

namespace rocs {

/// Placement of collocation unknowns inside the flat decision vector.
///
/// State nodal values come first, point-major, with interval boundaries
/// sharing a single point (continuity is implicit). Controls follow, one
/// block per collocation point. Free endpoint times, when present, sit at
/// the tail.
struct DecisionLayout {
  Mesh mesh;
  int n_x = 0, n_u = 0;
  int n_state_points = 0;  ///< sum of colloc counts + 1
  int n_colloc = 0;
  int control_offset = 0;
  int t0_index = -1;  ///< -1 when t0 is fixed
  int tf_index = -1;  ///< -1 when tf is fixed
  double t0_fixed = 0.0, tf_fixed = 0.0;
  int dimension = 0;
  std::vector<int> first_point;  ///< per interval: global index of its left node

  int state_index(int point, int comp) const { return point * n_x + comp; }
  int control_index(int colloc_point, int comp) const {
    return control_offset + colloc_point * n_u + comp;
  }
  double t0_of(const Vec& z) const { return t0_index < 0 ? t0_fixed : z[t0_index]; }
  double tf_of(const Vec& z) const { return tf_index < 0 ? tf_fixed : z[tf_index]; }
};

/// Solver-facing nonlinear program: box bounds on variables, two-sided row
/// bounds (lower == upper for equalities), callbacks, and a Jacobian
/// sparsity pattern that is a superset of the true nonzeros.
struct NlpProblem {
  int n = 0, m = 0;
  Vec x_lower, x_upper;
  Vec c_lower, c_upper;
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> constraints;
  std::vector<std::pair<int, int>> jacobian_pattern;  ///< (row, col), sorted, unique
};

/// Nodal collocation solution on a mesh.
struct CollocationSolution {
  Mesh mesh;
  double t0 = 0.0, tf = 0.0;
  double objective = 0.0;
  Mat states;    ///< n_state_points x n_x
  Mat controls;  ///< n_colloc x n_u
  double alpha() const { return 0.5 * (tf - t0); }
};

struct Transcription {
  NlpProblem nlp;
  DecisionLayout layout;
};

/// Transcribes the problem on the given mesh. Row order: all defect rows
/// (interval-major, then collocation point, then state component), then path
/// rows, then boundary rows.
Transcription assemble(const OcpDefinition& ocp, const Mesh& mesh);

/// Straight line in tau for states pinned at both ends, constant for states
/// pinned at one end, zero (clamped into bounds) otherwise; controls zero
/// clamped into bounds; free times at the midpoint of their bounds.
Vec initial_guess(const OcpDefinition& ocp, const DecisionLayout& layout);

CollocationSolution extract(const OcpDefinition& ocp, const DecisionLayout& layout, const Vec& z);
Vec pack(const DecisionLayout& layout, const CollocationSolution& sol);

/// State interpolant of interval k over its augmented nodes (local zeta).
Interpolant state_interpolant(const CollocationSolution& sol, int k);

}  // namespace rocs
