#include "rocs/ocp.hpp"

#include <stdexcept>

namespace rocs {

void OcpDefinition::finish() {
  if (n_x < 1 || n_u < 0) throw std::invalid_argument(name + ": bad dimensions");
  if (!dynamics) throw std::invalid_argument(name + ": dynamics callback required");
  if (!mayer) mayer = [](const Vec&, double, const Vec&, double) { return 0.0; };
  if (!lagrange) lagrange = [](const Vec&, const Vec&, double) { return 0.0; };
  if (!boundary) {
    n_b = 0;
    boundary = [](const Vec&, double, const Vec&, double) { return Vec(); };
  }
  if (!path) {
    n_c = 0;
    path = [](const Vec&, const Vec&, double) { return Vec(); };
  }
  if (x_lower.size() == 0) x_lower = Vec::Constant(n_x, -kInf);
  if (x_upper.size() == 0) x_upper = Vec::Constant(n_x, kInf);
  if (u_lower.size() == 0) u_lower = Vec::Constant(n_u, -kInf);
  if (u_upper.size() == 0) u_upper = Vec::Constant(n_u, kInf);
  if (boundary_lower.size() == 0) boundary_lower = Vec::Zero(n_b);
  if (boundary_upper.size() == 0) boundary_upper = Vec::Zero(n_b);
  if (path_lower.size() == 0) path_lower = Vec::Constant(n_c, -kInf);
  if (path_upper.size() == 0) path_upper = Vec::Zero(n_c);
  if (x0_value.empty()) x0_value.assign(n_x, std::nullopt);
  if (xf_value.empty()) xf_value.assign(n_x, std::nullopt);
  if (x_lower.size() != n_x || x_upper.size() != n_x || u_lower.size() != n_u ||
      u_upper.size() != n_u || boundary_lower.size() != n_b || boundary_upper.size() != n_b ||
      path_lower.size() != n_c || path_upper.size() != n_c)
    throw std::invalid_argument(name + ": bound sizes disagree with dimensions");
  if (!(tf_bounds.lower <= tf_bounds.upper) || !(t0_bounds.lower <= t0_bounds.upper))
    throw std::invalid_argument(name + ": inverted time bounds");
}

int Mesh::total_colloc() const {
  int total = 0;
  for (int n : colloc) total += n;
  return total;
}

void Mesh::validate() const {
  if (points.size() != colloc.size() + 1 || colloc.empty())
    throw std::invalid_argument("mesh: need K+1 points for K intervals");
  if (points.front() != -1.0 || points.back() != 1.0)
    throw std::invalid_argument("mesh: endpoints must be -1 and +1");
  for (size_t k = 0; k + 1 < points.size(); ++k)
    if (!(points[k + 1] > points[k]))
      throw std::invalid_argument("mesh: points must be strictly increasing");
  for (int n : colloc)
    if (n < 1) throw std::invalid_argument("mesh: collocation counts must be positive");
}

Mesh initial_mesh(int intervals, int colloc_per_interval) {
  if (intervals < 1) throw std::invalid_argument("initial_mesh: need at least one interval");
  Mesh m;
  m.points.resize(intervals + 1);
  for (int k = 0; k <= intervals; ++k) m.points[k] = -1.0 + 2.0 * k / intervals;
  m.points.front() = -1.0;
  m.points.back() = 1.0;
  m.colloc.assign(intervals, colloc_per_interval);
  m.validate();
  return m;
}

double tau_to_t(double tau, double t0, double tf) {
  return 0.5 * (tf - t0) * tau + 0.5 * (tf + t0);
}

double t_to_tau(double t, double t0, double tf) {
  if (!(tf > t0)) throw std::invalid_argument("t_to_tau: requires tf > t0");
  return (2.0 * t - (tf + t0)) / (tf - t0);
}

double zeta_to_tau(double zeta, double tau_left, double tau_right) {
  return 0.5 * (tau_right - tau_left) * zeta + 0.5 * (tau_right + tau_left);
}

double tau_to_zeta(double tau, double tau_left, double tau_right) {
  if (!(tau_right > tau_left)) throw std::invalid_argument("tau_to_zeta: empty interval");
  return (2.0 * tau - (tau_right + tau_left)) / (tau_right - tau_left);
}

double chi(double x, double tau_km1, double tau_k, double tau_kp1) {
  return tau_to_zeta(zeta_to_tau(x, tau_km1, tau_k), tau_k, tau_kp1);
}

double xi(double x, double tau_km1, double tau_k, double tau_kp1) {
  return tau_to_zeta(zeta_to_tau(x, tau_k, tau_kp1), tau_km1, tau_k);
}

}  // namespace rocs
