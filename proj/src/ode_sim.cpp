#include "rocs/ode_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rocs {

Integrator integrator_from_name(const std::string& name) {
  if (name == "dp54") return Integrator::dp54;
  if (name == "v98") return Integrator::v98;
  throw std::invalid_argument("unknown integrator '" + name + "' (expected dp54 or v98)");
}

std::string to_string(Integrator method) {
  return method == Integrator::dp54 ? "dp54" : "v98";
}

namespace {

struct StepResult {
  Vec y;
  Vec err;
};

// Dormand-Prince 5(4) pair; the fifth-order value propagates.
StepResult step_dp54(const OdeField& f, double t, const Vec& y, double h, int& evals) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + h / 5, y + h * (a21 * k1));
  const Vec k3 = f(t + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
  const Vec k4 = f(t + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vec k5 = f(t + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vec k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  StepResult out;
  out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec k7 = f(t + h, out.y);
  out.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  evals += 7;
  return out;
}

Vec rk4_substep(const OdeField& f, double t, const Vec& y, double h, int& evals) {
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + h / 2, y + (h / 2) * k1);
  const Vec k3 = f(t + h / 2, y + (h / 2) * k2);
  const Vec k4 = f(t + h, y + h * k3);
  evals += 4;
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// 9(8) pair built by Richardson extrapolation of the classical fourth-order
// step over the substep counts 1..6. The per-level error expands in the
// substep size with every power from the fourth up, so fitting the basis
// {1, x^4, ..., x^8} through the six levels and reading off the constant
// term cancels five error powers at once: the combination is ninth order,
// and the same fit through levels 2..6 gives the embedded eighth-order
// value. Both are fixed weight vectors, precomputed from the level sizes.
StepResult step_v98(const OdeField& f, double t, const Vec& y, double h, int& evals) {
  constexpr int levels = 6;
  // Exact solutions of the two fitting systems; the float inverse carries a
  // 1e-9 relative error that would cap the achievable accuracy.
  static const double w9[levels] = {-1.0 / 317520,    16.0 / 3969,  -81.0 / 392,
                                    8192.0 / 3969,    -390625.0 / 63504,
                                    1296.0 / 245};
  static const double w8[levels - 1] = {4.0 / 1785, -729.0 / 4760, 1024.0 / 595,
                                        -15625.0 / 2856, 2916.0 / 595};
  Vec level[levels];
  for (int j = 0; j < levels; ++j) {
    const int n = j + 1;
    const double hs = h / n;
    Vec yj = y;
    for (int s = 0; s < n; ++s) yj = rk4_substep(f, t + s * hs, yj, hs, evals);
    level[j] = yj;
  }
  StepResult out;
  out.y = Vec::Zero(y.size());
  Vec y8 = Vec::Zero(y.size());
  for (int j = 0; j < levels; ++j) out.y += w9[j] * level[j];
  for (int j = 1; j < levels; ++j) y8 += w8[j - 1] * level[j];
  out.err = out.y - y8;
  return out;
}

}  // namespace

SimResult integrate(const OdeField& f, const Vec& y0, double span_begin,
                    double span_end, const std::vector<double>& required,
                    const SimOptions& opts) {
  SimResult out;
  const double span = span_end - span_begin;
  if (span == 0.0 || !std::isfinite(span)) {
    out.failure = "empty or non-finite integration span";
    return out;
  }
  const double dir = span > 0 ? 1.0 : -1.0;
  const double tiny = 1e-14 * std::abs(span);
  const double blowup_cap = 1e10 * (1.0 + y0.cwiseAbs().maxCoeff());
  const double order_exp = opts.method == Integrator::dp54 ? 1.0 / 5.0 : 1.0 / 9.0;

  auto attempt = [&](double t, const Vec& y, double h) {
    return opts.method == Integrator::dp54 ? step_dp54(f, t, y, h, out.rhs_evals)
                                           : step_v98(f, t, y, h, out.rhs_evals);
  };

  std::vector<double> targets = required;
  std::sort(targets.begin(), targets.end(),
            [dir](double a, double b) { return dir * a < dir * b; });
  targets.push_back(span_end);
  std::vector<double> uniq;
  for (double tt : targets) {
    if ((tt - span_begin) * dir <= tiny) continue;
    if ((span_end - tt) * dir < -tiny) {
      out.failure = "requested output point outside the integration span";
      return out;
    }
    if (uniq.empty() || std::abs(tt - uniq.back()) > tiny) uniq.push_back(tt);
  }

  std::vector<double> ts = {span_begin};
  std::vector<Vec> ys = {y0};
  double t = span_begin;
  Vec y = y0;
  double h_ctrl = opts.initial_step > 0 ? opts.initial_step : std::abs(span) / 50.0;
  if (!uniq.empty()) h_ctrl = std::min(h_ctrl, std::abs(uniq.front() - span_begin));

  for (double tt : uniq) {
    while ((tt - t) * dir > tiny) {
      if (out.steps_accepted + out.steps_rejected >= opts.max_steps) {
        out.failure = "step limit reached";
        return out;
      }
      bool landing = false;
      double hs = dir * h_ctrl;
      if ((t + hs - tt) * dir >= 0.0) {
        hs = tt - t;
        landing = true;
      }
      if (std::abs(hs) < tiny) {
        out.failure = "step size underflow";
        return out;
      }
      const StepResult st = attempt(t, y, hs);
      double ratio = kInf;
      if (st.y.allFinite() && st.err.allFinite()) {
        const double scale =
            std::max(1.0, std::max(y.cwiseAbs().maxCoeff(), st.y.cwiseAbs().maxCoeff()));
        ratio = st.err.cwiseAbs().maxCoeff() / (opts.tolerance * scale);
      }
      if (ratio <= 1.0) {
        ++out.steps_accepted;
        y = st.y;
        t = landing ? tt : t + hs;
        ts.push_back(t);
        ys.push_back(y);
        if (y.cwiseAbs().maxCoeff() > blowup_cap) {
          out.failure = "trajectory magnitude blew past 1e10 times the initial size";
          return out;
        }
        const double grow =
            ratio > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(ratio, -order_exp))) : 5.0;
        if (!landing) {
          h_ctrl = std::abs(hs) * grow;
        } else if (grow > 1.0) {
          h_ctrl = std::max(h_ctrl, std::abs(hs) * grow);
        }
      } else {
        ++out.steps_rejected;
        const double shrink =
            std::isfinite(ratio) ? std::max(0.1, std::min(0.7, 0.9 * std::pow(ratio, -order_exp)))
                                 : 0.1;
        h_ctrl = std::abs(hs) * shrink;
      }
    }
    t = tt;  // land exactly even when reached within the tiny slack
    ts.back() = tt;
  }

  out.ok = true;
  out.t = std::move(ts);
  out.y.resize(static_cast<int>(out.t.size()), y0.size());
  for (size_t i = 0; i < out.t.size(); ++i) out.y.row(static_cast<int>(i)) = ys[i];
  return out;
}

namespace {

int first_point(const Mesh& mesh, int k) {
  int acc = 0;
  for (int j = 0; j < k; ++j) acc += mesh.colloc[j];
  return acc;
}

IntervalSim from_sim(const SimResult& sim, bool reverse,
                     const std::function<double(double)>& zeta_to_global) {
  IntervalSim out;
  out.ok = sim.ok;
  out.failure = sim.failure;
  if (!sim.ok) return out;
  const int n = static_cast<int>(sim.t.size());
  out.zeta.resize(n);
  out.tau.resize(n);
  out.y.resize(n, sim.y.cols());
  for (int i = 0; i < n; ++i) {
    const int src = reverse ? n - 1 - i : i;
    out.zeta[i] = sim.t[src];
    out.tau[i] = zeta_to_global(sim.t[src]);
    out.y.row(i) = sim.y.row(src);
  }
  return out;
}

}  // namespace

Interpolant control_interpolant(const CollocationSolution& sol, int k) {
  const int nk = sol.mesh.colloc[k];
  const auto grid = make_grid(nk);
  const int base = first_point(sol.mesh, k);
  Mat values(nk, sol.controls.cols());
  for (int i = 0; i < nk; ++i) values.row(i) = sol.controls.row(base + i);
  return Interpolant(grid.points, values);
}

IntervalSim simulate_ivp(const OcpDefinition& ocp, const CollocationSolution& sol,
                         int k, const SimOptions& opts) {
  const double a = sol.mesh.points[k], b = sol.mesh.points[k + 1];
  const double rate = sol.alpha() * sol.mesh.half_width(k);
  const Interpolant u = control_interpolant(sol, k);
  OdeField f = [&](double zeta, const Vec& x) {
    const double tau = zeta_to_tau(zeta, a, b);
    return Vec(rate * ocp.dynamics(x, u.eval(zeta).transpose(), tau));
  };
  const auto grid = make_grid(sol.mesh.colloc[k]);
  std::vector<double> req(grid.points.data() + 1, grid.points.data() + grid.n);
  const Vec x0 = sol.states.row(first_point(sol.mesh, k)).transpose();
  const SimResult sim = integrate(f, x0, -1.0, 1.0, req, opts);
  return from_sim(sim, false, [&](double z) { return zeta_to_tau(z, a, b); });
}

IntervalSim simulate_tvp(const OcpDefinition& ocp, const CollocationSolution& sol,
                         int k, const SimOptions& opts) {
  const double a = sol.mesh.points[k], b = sol.mesh.points[k + 1];
  const double rate = sol.alpha() * sol.mesh.half_width(k);
  const Interpolant u = control_interpolant(sol, k);
  OdeField f = [&](double zeta, const Vec& x) {
    const double tau = zeta_to_tau(zeta, a, b);
    return Vec(rate * ocp.dynamics(x, u.eval(zeta).transpose(), tau));
  };
  const auto grid = make_grid(sol.mesh.colloc[k]);
  std::vector<double> req(grid.points.data(), grid.points.data() + grid.n);
  const Vec xf = sol.states.row(first_point(sol.mesh, k) + sol.mesh.colloc[k]).transpose();
  const SimResult sim = integrate(f, xf, 1.0, -1.0, req, opts);
  return from_sim(sim, true, [&](double z) { return zeta_to_tau(z, a, b); });
}

IntervalSim simulate_merged_ivp(const OcpDefinition& ocp,
                                const CollocationSolution& sol, int k,
                                const SimOptions& opts) {
  const double tkm1 = sol.mesh.points[k], tk = sol.mesh.points[k + 1],
               tkp1 = sol.mesh.points[k + 2];
  const double alpha = sol.alpha();
  const double beta_k = sol.mesh.half_width(k);
  const Interpolant u_left = control_interpolant(sol, k);
  // Extended coordinate keeps interval k's scaling past s = +1, so the field
  // carries the same rate factor on both halves. The control is interval k's
  // interpolant extrapolated over the whole span: the trial asks whether one
  // polynomial control could serve the merged interval, so a control that
  // does not extend smoothly makes the propagated state drift visibly.
  auto s_to_tau = [&](double s) {
    return s <= 1.0 ? zeta_to_tau(s, tkm1, tk) : tk + (s - 1.0) * beta_k;
  };
  OdeField f = [&](double s, const Vec& x) {
    const double tau = s_to_tau(s);
    return Vec(alpha * beta_k * ocp.dynamics(x, u_left.eval(s).transpose(), tau));
  };
  const auto grid_l = make_grid(sol.mesh.colloc[k]);
  const auto grid_r = make_grid(sol.mesh.colloc[k + 1]);
  std::vector<double> req(grid_l.points.data() + 1, grid_l.points.data() + grid_l.n);
  req.push_back(1.0);
  for (int i = 0; i < grid_r.n; ++i) req.push_back(xi(grid_r.points[i], tkm1, tk, tkp1));
  const double s_end = xi(1.0, tkm1, tk, tkp1);
  const Vec x0 = sol.states.row(first_point(sol.mesh, k)).transpose();
  const SimResult sim = integrate(f, x0, -1.0, s_end, req, opts);
  return from_sim(sim, false, s_to_tau);
}

IntervalSim simulate_merged_tvp(const OcpDefinition& ocp,
                                const CollocationSolution& sol, int k,
                                const SimOptions& opts) {
  const double tkm1 = sol.mesh.points[k], tk = sol.mesh.points[k + 1],
               tkp1 = sol.mesh.points[k + 2];
  const double alpha = sol.alpha();
  const double beta_kp1 = sol.mesh.half_width(k + 1);
  const Interpolant u_right = control_interpolant(sol, k + 1);
  // Mirror of the forward trial: interval k+1's control extrapolates back
  // across interval k.
  auto s_to_tau = [&](double s) {
    return s >= -1.0 ? zeta_to_tau(s, tk, tkp1) : tk + (s + 1.0) * beta_kp1;
  };
  OdeField f = [&](double s, const Vec& x) {
    const double tau = s_to_tau(s);
    return Vec(alpha * beta_kp1 * ocp.dynamics(x, u_right.eval(s).transpose(), tau));
  };
  const auto grid_l = make_grid(sol.mesh.colloc[k]);
  const auto grid_r = make_grid(sol.mesh.colloc[k + 1]);
  std::vector<double> req(grid_r.points.data(), grid_r.points.data() + grid_r.n);
  for (int i = 0; i < grid_l.n; ++i) req.push_back(chi(grid_l.points[i], tkm1, tk, tkp1));
  const double s_begin = chi(-1.0, tkm1, tk, tkp1);
  const Vec xf =
      sol.states.row(first_point(sol.mesh, k) + sol.mesh.colloc[k] + sol.mesh.colloc[k + 1])
          .transpose();
  const SimResult sim = integrate(f, xf, 1.0, s_begin, req, opts);
  return from_sim(sim, true, s_to_tau);
}

}  // namespace rocs
