#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rocs/lgr_basis.hpp"

namespace rocs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval bound; lower == upper pins the value.
struct Bound {
  double lower = -kInf;
  double upper = kInf;
  bool fixed() const { return lower == upper; }
  static Bound fixed_at(double v) { return {v, v}; }
};

/// Continuous-time optimal control problem on normalized time tau in [-1, +1].
///
/// Dynamics are dx/dtau scaled by alpha = (tf - t0)/2 at transcription time,
/// so callbacks receive tau and never the horizon. Equality boundary
/// conditions are expressed as residual rows with lower == upper == 0.
struct OcpDefinition {
  std::string name;
  int n_x = 0;  ///< states
  int n_u = 0;  ///< controls
  int n_b = 0;  ///< boundary residual rows
  int n_c = 0;  ///< path constraint rows (after lowering pure bounds)

  std::function<double(const Vec& x0, double t0, const Vec& xf, double tf)> mayer;
  std::function<double(const Vec& x, const Vec& u, double tau)> lagrange;
  std::function<Vec(const Vec& x, const Vec& u, double tau)> dynamics;
  std::function<Vec(const Vec& x0, double t0, const Vec& xf, double tf)> boundary;
  std::function<Vec(const Vec& x, const Vec& u, double tau)> path;

  Vec boundary_lower, boundary_upper;
  Vec path_lower, path_upper;
  Vec x_lower, x_upper;  ///< state box bounds, size n_x
  Vec u_lower, u_upper;  ///< control box bounds, size n_u

  Bound t0_bounds = Bound::fixed_at(0.0);
  Bound tf_bounds;

  /// Endpoint values known from equality boundary conditions; drives the
  /// straight-line / constant initial guess split.
  std::vector<std::optional<double>> x0_value, xf_value;

  void finish();  ///< fills defaulted bounds/callbacks, validates dimensions
};

/// Mesh on [-1, +1]: K+1 strictly increasing points with tau_0 = -1 and
/// tau_K = +1, plus a collocation count per interval.
struct Mesh {
  std::vector<double> points;
  std::vector<int> colloc;

  int intervals() const { return int(colloc.size()); }
  int total_colloc() const;
  double width(int k) const { return points[k + 1] - points[k]; }
  /// Half interval width: the scale factor from interval-local zeta to tau.
  double half_width(int k) const { return 0.5 * width(k); }
  void validate() const;  ///< throws std::invalid_argument on malformed mesh
};

/// K uniform intervals, n collocation points each.
Mesh initial_mesh(int intervals, int colloc_per_interval);

// Affine maps between physical time, normalized time, and interval-local time.
double tau_to_t(double tau, double t0, double tf);
double t_to_tau(double t, double t0, double tf);  ///< throws if tf <= t0
double zeta_to_tau(double zeta, double tau_left, double tau_right);
double tau_to_zeta(double tau, double tau_left, double tau_right);

/// Maps interval-k local coordinates into interval-(k+1) local coordinates
/// across the shared mesh point tau_k: chi(+1) == -1.
double chi(double x, double tau_km1, double tau_k, double tau_kp1);
/// Inverse of chi: maps interval-(k+1) local coordinates into interval-k
/// local coordinates; xi(-1) == +1.
double xi(double x, double tau_km1, double tau_k, double tau_kp1);

}  // namespace rocs
