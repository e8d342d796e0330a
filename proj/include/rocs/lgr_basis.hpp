#pragma once

#include <Eigen/Dense>

namespace rocs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Legendre-Gauss-Radau collocation grid on [-1, +1).
///
/// The n collocation points are the roots of P_{n-1} + P_n and include the
/// left endpoint -1. The augmented node set appends the noncollocated point
/// +1, which carries a state value but no dynamics residual.
struct CollocationGrid {
  int n = 0;         ///< number of collocation points
  Vec points;        ///< n points, strictly increasing, points[0] == -1
  Vec weights;       ///< n positive quadrature weights, sum == 2
  Vec aug_points;    ///< n+1 nodes: points plus +1
  Vec bary_weights;  ///< barycentric weights of aug_points
  Mat diff_matrix;   ///< n x (n+1); row i is dl_j/dzeta at points[i]
};

/// Builds the n-point grid. Throws std::invalid_argument unless 1 <= n <= 64.
CollocationGrid make_grid(int n);

/// Barycentric weights v_j = 1 / prod_{l != j} (x_j - x_l), rescaled so the
/// largest magnitude is 1. Nodes must be distinct.
Vec barycentric_weights(const Vec& nodes);

/// Second-form barycentric interpolant through (nodes, values); one column of
/// `values` per component. Valid anywhere, including outside the node span.
class Interpolant {
 public:
  Interpolant() = default;
  Interpolant(Vec nodes, Mat values);

  Eigen::RowVectorXd eval(double x) const;
  /// First derivative of the interpolating polynomial at x.
  Eigen::RowVectorXd deriv(double x) const;

  const Vec& nodes() const { return nodes_; }
  const Mat& values() const { return values_; }

 private:
  Vec nodes_;
  Vec w_;
  Mat values_;
};

/// Evaluates the interpolant through grid.aug_points at each query point.
/// `values` has one row per augmented node; result has one row per query.
Mat interpolate(const CollocationGrid& grid, const Mat& values, const Vec& queries);

}  // namespace rocs
