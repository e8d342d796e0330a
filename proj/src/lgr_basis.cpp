#include "rocs/lgr_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace rocs {
namespace {

// Legendre P_{n-1}(x), P_n(x) and their derivatives by the three-term
// recurrence; safe for |x| <= 1 + eps.
struct LegendrePair {
  double pm1, pn, dpm1, dpn;
};

LegendrePair legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
  if (n == 1) return {p0, p1, d0, d1};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    const double d2 = d0 + (2 * k - 1) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p0, p1, d0, d1};
}

}  // namespace

CollocationGrid make_grid(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("make_grid: n must be in [1, 64]");

  CollocationGrid g;
  g.n = n;
  g.points.resize(n);
  g.points[0] = -1.0;

  // Interior points: Newton on P_{n-1} + P_n from Chebyshev-Radau seeds.
  for (int j = 1; j < n; ++j) {
    double x = -std::cos(2.0 * M_PI * j / (2.0 * n - 1.0));
    for (int it = 0; it < 100; ++it) {
      const LegendrePair lp = legendre_pair(n, x);
      const double f = lp.pm1 + lp.pn;
      const double df = lp.dpm1 + lp.dpn;
      const double dx = f / df;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    g.points[j] = x;
  }
  for (int j = 1; j < n; ++j) {
    if (!(g.points[j] > g.points[j - 1]) || !(g.points[j] < 1.0))
      throw std::runtime_error("make_grid: point iteration failed to converge");
  }

  // w_i = (1 - x_i) / (n^2 P_{n-1}(x_i)^2); the closed form is valid at -1
  // too, where it reduces to 2 / n^2.
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const LegendrePair lp = legendre_pair(n, g.points[i]);
    g.weights[i] = (1.0 - g.points[i]) / (double(n) * double(n) * lp.pm1 * lp.pm1);
  }

  g.aug_points.resize(n + 1);
  g.aug_points.head(n) = g.points;
  g.aug_points[n] = 1.0;
  g.bary_weights = barycentric_weights(g.aug_points);

  // D_ij = (v_j / v_i) / (x_i - x_j), diagonal from zero row sums.
  g.diff_matrix.resize(n, n + 1);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      const double dij =
          (g.bary_weights[j] / g.bary_weights[i]) / (g.aug_points[i] - g.aug_points[j]);
      g.diff_matrix(i, j) = dij;
      diag -= dij;
    }
    g.diff_matrix(i, i) = diag;
  }
  return g;
}

Vec barycentric_weights(const Vec& nodes) {
  const int m = int(nodes.size());
  Vec w = Vec::Ones(m);
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < m; ++l) {
      if (l != j) w[j] *= (nodes[j] - nodes[l]);
    }
    w[j] = 1.0 / w[j];
  }
  w /= w.cwiseAbs().maxCoeff();
  return w;
}

Interpolant::Interpolant(Vec nodes, Mat values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.rows())
    throw std::invalid_argument("Interpolant: one value row per node required");
  w_ = barycentric_weights(nodes_);
}

Eigen::RowVectorXd Interpolant::eval(double x) const {
  const int m = int(nodes_.size());
  // Exact hit: return the nodal row (the second form would divide by zero).
  for (int j = 0; j < m; ++j) {
    if (x == nodes_[j] || std::abs(x - nodes_[j]) < 1e-14 * (1.0 + std::abs(x)))
      return values_.row(j);
  }
  Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(values_.cols());
  double den = 0.0;
  for (int j = 0; j < m; ++j) {
    const double c = w_[j] / (x - nodes_[j]);
    num += c * values_.row(j);
    den += c;
  }
  return num / den;
}

Eigen::RowVectorXd Interpolant::deriv(double x) const {
  const int m = int(nodes_.size());
  // At a node, use the differentiation-matrix row for that node.
  for (int i = 0; i < m; ++i) {
    if (x == nodes_[i] || std::abs(x - nodes_[i]) < 1e-14 * (1.0 + std::abs(x))) {
      Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(values_.cols());
      double diag = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double dij = (w_[j] / w_[i]) / (nodes_[i] - nodes_[j]);
        out += dij * values_.row(j);
        diag -= dij;
      }
      out += diag * values_.row(i);
      return out;
    }
  }
  // p = N/D in second form; differentiate the quotient directly.
  Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(values_.cols());
  Eigen::RowVectorXd dnum = Eigen::RowVectorXd::Zero(values_.cols());
  double den = 0.0, dden = 0.0;
  for (int j = 0; j < m; ++j) {
    const double r = 1.0 / (x - nodes_[j]);
    const double c = w_[j] * r;
    num += c * values_.row(j);
    den += c;
    dnum -= c * r * values_.row(j);
    dden -= c * r;
  }
  return (dnum * den - num * dden) / (den * den);
}

Mat interpolate(const CollocationGrid& grid, const Mat& values, const Vec& queries) {
  Interpolant p(grid.aug_points, values);
  Mat out(queries.size(), values.cols());
  for (int q = 0; q < queries.size(); ++q) out.row(q) = p.eval(queries[q]);
  return out;
}

}  // namespace rocs
