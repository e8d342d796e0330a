#include "rocs/nlp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rocs {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::line_search_failure: return "line_search_failure";
    case SolveStatus::failed: return "failed";
  }
  return "unknown";
}

JacobianSparsity analyze_pattern(int m, int n, std::vector<std::pair<int, int>> entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  JacobianSparsity sp;
  sp.m = m;
  sp.n = n;
  sp.rows_of_col.assign(n, {});
  for (const auto& [r, c] : entries) sp.rows_of_col[c].push_back(r);
  sp.entries = std::move(entries);

  // Greedy distance-2 coloring: a color may not recur among the columns
  // sharing any row.
  std::vector<std::vector<int>> cols_of_row(m);
  for (const auto& [r, c] : sp.entries) cols_of_row[r].push_back(c);
  sp.color_of.assign(n, -1);
  std::vector<int> mark(n + 1, -1);
  for (int c = 0; c < n; ++c) {
    if (sp.rows_of_col[c].empty()) continue;
    for (int r : sp.rows_of_col[c])
      for (int other : cols_of_row[r])
        if (sp.color_of[other] >= 0) mark[sp.color_of[other]] = c;
    int color = 0;
    while (mark[color] == c) ++color;
    sp.color_of[c] = color;
    sp.n_colors = std::max(sp.n_colors, color + 1);
  }
  return sp;
}

namespace {

// Per-column step mode once bounds are taken into account.
enum class FdMode { central, forward, backward, skip };

struct FdPlan {
  FdMode mode;
  double h;
};

FdPlan fd_plan(double z, double lo, double hi, double h) {
  const bool up_ok = z + h <= hi;
  const bool dn_ok = z - h >= lo;
  if (up_ok && dn_ok) return {FdMode::central, h};
  if (up_ok) return {FdMode::forward, std::min(h, hi - z)};
  if (dn_ok) return {FdMode::backward, std::min(h, z - lo)};
  const double room_up = hi - z, room_dn = z - lo;
  if (std::max(room_up, room_dn) < 1e-14 * (1.0 + std::abs(z))) return {FdMode::skip, 0.0};
  return room_up >= room_dn ? FdPlan{FdMode::forward, room_up} : FdPlan{FdMode::backward, room_dn};
}

}  // namespace

Eigen::SparseMatrix<double> fd_jacobian(const NlpProblem& nlp, const Vec& z, const Vec& base,
                                        const JacobianSparsity& sp, double fd_step) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sp.entries.size());
  Vec zp(z.size()), zm(z.size());

  for (int color = 0; color < sp.n_colors; ++color) {
    for (const FdMode mode : {FdMode::central, FdMode::forward, FdMode::backward}) {
      zp = z;
      zm = z;
      std::vector<std::pair<int, double>> members;
      for (int c = 0; c < sp.n; ++c) {
        if (sp.color_of[c] != color) continue;
        const FdPlan plan = fd_plan(z[c], nlp.x_lower[c], nlp.x_upper[c],
                                    fd_step * (1.0 + std::abs(z[c])));
        if (plan.mode != mode) continue;
        members.emplace_back(c, plan.h);
        if (mode != FdMode::backward) zp[c] += plan.h;
        if (mode != FdMode::forward) zm[c] -= plan.h;
      }
      if (members.empty()) continue;
      const Vec cp = (mode == FdMode::backward) ? base : nlp.constraints(zp);
      const Vec cm = (mode == FdMode::forward) ? base : nlp.constraints(zm);
      for (const auto& [c, h] : members) {
        const double denom = (mode == FdMode::central) ? 2.0 * h : h;
        for (int r : sp.rows_of_col[c]) trips.emplace_back(r, c, (cp[r] - cm[r]) / denom);
      }
    }
  }
  Eigen::SparseMatrix<double> jac(sp.m, sp.n);
  jac.setFromTriplets(trips.begin(), trips.end());
  return jac;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& z, const Vec& lower,
                const Vec& upper, double fd_step) {
  Vec g = Vec::Zero(z.size());
  Vec zt = z;
  const double f0 = f(z);
  for (int i = 0; i < z.size(); ++i) {
    const FdPlan plan = fd_plan(z[i], lower[i], upper[i], fd_step * (1.0 + std::abs(z[i])));
    if (plan.mode == FdMode::skip) continue;
    double fp = f0, fm = f0;
    if (plan.mode != FdMode::backward) {
      zt[i] = z[i] + plan.h;
      fp = f(zt);
    }
    if (plan.mode != FdMode::forward) {
      zt[i] = z[i] - plan.h;
      fm = f(zt);
    }
    zt[i] = z[i];
    g[i] = (fp - fm) / ((plan.mode == FdMode::central) ? 2.0 * plan.h : plan.h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Elastic interior-point QP
//
//   min 1/2 x'Qx + c'x + nu * 1'(p + q)
//   s.t. Ax + p - q = b,  l <= x <= u,  p, q >= 0
//
// Ranged NLP rows enter through slack columns appended to x, so the SQP layer
// only ever sees this equality form. Elastics make the subproblem feasible
// regardless of the linearization; their duals obey |lambda| <= nu.
// ---------------------------------------------------------------------------
namespace {

struct QpResult {
  Vec x;        // full QP vector (direction + row slacks)
  Vec lambda;   // row multipliers
  Vec mu_lo, mu_hi;
  double elastic = 0.0;  // total elastic usage
  bool ok = false;
};

struct QpProblem {
  const Mat& Q;
  const Mat& A;
  const Vec& c;
  const Vec& b;
  const Vec& l;
  const Vec& u;
  double nu;
};

QpResult solve_qp(const QpProblem& qp) {
  const int n = int(qp.c.size());
  const int m = int(qp.b.size());
  QpResult out;

  std::vector<bool> has_lo(n), has_hi(n);
  for (int i = 0; i < n; ++i) {
    has_lo[i] = std::isfinite(qp.l[i]);
    has_hi[i] = std::isfinite(qp.u[i]);
  }

  // Strictly interior start.
  Vec x = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double lo = qp.l[i], hi = qp.u[i];
    const double pad = 1e-2 * std::min(1.0, has_lo[i] && has_hi[i] ? (hi - lo) : 1.0);
    x[i] = std::min(has_hi[i] ? hi - pad : kInf, std::max(has_lo[i] ? lo + pad : -kInf, 0.0));
  }
  Vec lambda = Vec::Zero(m);
  Vec p = Vec::Ones(m), q = Vec::Ones(m);
  Vec mu_lo = Vec::Zero(n), mu_hi = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (has_lo[i]) mu_lo[i] = 1.0;
    if (has_hi[i]) mu_hi[i] = 1.0;
  }

  int n_pairs = 2 * m;
  for (int i = 0; i < n; ++i) n_pairs += int(has_lo[i]) + int(has_hi[i]);

  auto mu_average = [&]() {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (has_lo[i]) acc += (x[i] - qp.l[i]) * mu_lo[i];
      if (has_hi[i]) acc += (qp.u[i] - x[i]) * mu_hi[i];
    }
    for (int r = 0; r < m; ++r) acc += p[r] * (qp.nu - lambda[r]) + q[r] * (qp.nu + lambda[r]);
    return acc / std::max(1, n_pairs);
  };

  const double scale =
      1.0 + std::max(m > 0 ? qp.b.cwiseAbs().maxCoeff() : 0.0, qp.c.cwiseAbs().maxCoeff());
  Mat H(n, n);

  for (int iter = 0; iter < 80; ++iter) {
    Vec r1 = qp.Q * x + qp.c - qp.A.transpose() * lambda - mu_lo + mu_hi;
    Vec r2 = qp.A * x + p - q - qp.b;
    const double mu = mu_average();
    if (r1.cwiseAbs().maxCoeff() < 1e-10 * scale &&
        (m == 0 || r2.cwiseAbs().maxCoeff() < 1e-10 * scale) && mu < 1e-12 * scale)
      break;

    // Recomputed slacks can cancel to exactly zero when an iterate pins a
    // bound or the penalty cap to all digits; floor them so the barrier
    // terms stay finite (a huge diagonal entry freezes that row, which is
    // the right limit behavior).
    Vec sl(n), su(n);
    Vec theta_x = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      sl[i] = has_lo[i] ? std::max(x[i] - qp.l[i], 1e-15 * (1.0 + std::abs(qp.l[i]))) : 1.0;
      su[i] = has_hi[i] ? std::max(qp.u[i] - x[i], 1e-15 * (1.0 + std::abs(qp.u[i]))) : 1.0;
      if (has_lo[i]) theta_x[i] += mu_lo[i] / sl[i];
      if (has_hi[i]) theta_x[i] += mu_hi[i] / su[i];
    }
    const double w_floor = 1e-15 * (1.0 + qp.nu);
    Vec w = (qp.nu - lambda.array()).max(w_floor).matrix();
    Vec v = (qp.nu + lambda.array()).max(w_floor).matrix();
    Vec theta_r = (p.array() / w.array() + q.array() / v.array()).matrix();

    H = qp.Q;
    H.diagonal() += theta_x;
    Eigen::LLT<Mat> hfac(H);
    double reg = 1e-12;
    while (hfac.info() != Eigen::Success && reg < 1.0) {
      H.diagonal().array() += reg;
      hfac.compute(H);
      reg *= 100.0;
    }
    if (hfac.info() != Eigen::Success) return out;

    Mat hinv_at;
    Mat S;
    if (m > 0) {
      hinv_at = hfac.solve(qp.A.transpose());
      S = qp.A * hinv_at;
      S.diagonal() += theta_r;
    }
    Eigen::LDLT<Mat> sfac;
    if (m > 0) {
      sfac.compute(S);
      if (sfac.info() != Eigen::Success) return out;
    }

    // One pass computes the step for given complementarity targets.
    Vec dx, dl, dp, dq, dml, dmh;
    auto newton = [&](const Vec& rcl, const Vec& rcu, const Vec& rcp, const Vec& rcq) {
      Vec rx = -r1;
      for (int i = 0; i < n; ++i) {
        if (has_lo[i]) rx[i] += rcl[i] / sl[i];
        if (has_hi[i]) rx[i] -= rcu[i] / su[i];
      }
      if (m > 0) {
        Vec rl = -r2 - (rcp.array() / w.array()).matrix() + (rcq.array() / v.array()).matrix();
        dl = sfac.solve(rl - hinv_at.transpose() * rx);
        dx = hfac.solve(rx + qp.A.transpose() * dl);
        dp = ((rcp.array() + p.array() * dl.array()) / w.array()).matrix();
        dq = ((rcq.array() - q.array() * dl.array()) / v.array()).matrix();
      } else {
        dl = Vec::Zero(0);
        dp = Vec::Zero(0);
        dq = Vec::Zero(0);
        dx = hfac.solve(rx);
      }
      dml = Vec::Zero(n);
      dmh = Vec::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (has_lo[i]) dml[i] = (rcl[i] - mu_lo[i] * dx[i]) / sl[i];
        if (has_hi[i]) dmh[i] = (rcu[i] + mu_hi[i] * dx[i]) / su[i];
      }
    };

    auto step_lengths = [&](double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      const double frac = 0.995;
      for (int i = 0; i < n; ++i) {
        if (has_lo[i] && dx[i] < 0) ap = std::min(ap, -frac * sl[i] / dx[i]);
        if (has_hi[i] && dx[i] > 0) ap = std::min(ap, frac * su[i] / dx[i]);
        if (has_lo[i] && dml[i] < 0) ad = std::min(ad, -frac * mu_lo[i] / dml[i]);
        if (has_hi[i] && dmh[i] < 0) ad = std::min(ad, -frac * mu_hi[i] / dmh[i]);
      }
      for (int r = 0; r < m; ++r) {
        if (dp[r] < 0) ap = std::min(ap, -frac * p[r] / dp[r]);
        if (dq[r] < 0) ap = std::min(ap, -frac * q[r] / dq[r]);
        if (dl[r] > 0) ad = std::min(ad, frac * w[r] / dl[r]);   // keep nu - lambda > 0
        if (dl[r] < 0) ad = std::min(ad, -frac * v[r] / dl[r]);  // keep nu + lambda > 0
      }
    };

    // Affine predictor.
    Vec rcl(n), rcu(n), rcp(m), rcq(m);
    for (int i = 0; i < n; ++i) {
      rcl[i] = has_lo[i] ? -sl[i] * mu_lo[i] : 0.0;
      rcu[i] = has_hi[i] ? -su[i] * mu_hi[i] : 0.0;
    }
    for (int r = 0; r < m; ++r) {
      rcp[r] = -p[r] * w[r];
      rcq[r] = -q[r] * v[r];
    }
    newton(rcl, rcu, rcp, rcq);
    double ap, ad;
    step_lengths(ap, ad);

    double mu_aff = 0.0;
    for (int i = 0; i < n; ++i) {
      if (has_lo[i]) mu_aff += (sl[i] + ap * dx[i]) * (mu_lo[i] + ad * dml[i]);
      if (has_hi[i]) mu_aff += (su[i] - ap * dx[i]) * (mu_hi[i] + ad * dmh[i]);
    }
    for (int r = 0; r < m; ++r) {
      mu_aff += (p[r] + ap * dp[r]) * (w[r] - ad * dl[r]);
      mu_aff += (q[r] + ap * dq[r]) * (v[r] + ad * dl[r]);
    }
    mu_aff /= std::max(1, n_pairs);
    const double sigma = std::pow(std::max(0.0, mu_aff) / std::max(mu, 1e-300), 3.0);
    const double target = std::min(1.0, sigma) * mu;

    // Corrector.
    Vec dx_a = dx, dl_a = dl, dp_a = dp, dq_a = dq, dml_a = dml, dmh_a = dmh;
    for (int i = 0; i < n; ++i) {
      if (has_lo[i]) rcl[i] = target - sl[i] * mu_lo[i] - dx_a[i] * dml_a[i];
      if (has_hi[i]) rcu[i] = target - su[i] * mu_hi[i] + dx_a[i] * dmh_a[i];
    }
    for (int r = 0; r < m; ++r) {
      rcp[r] = target - p[r] * w[r] + dp_a[r] * dl_a[r];
      rcq[r] = target - q[r] * v[r] - dq_a[r] * dl_a[r];
    }
    newton(rcl, rcu, rcp, rcq);
    step_lengths(ap, ad);

    x += ap * dx;
    p += ap * dp;
    q += ap * dq;
    lambda += ad * dl;
    mu_lo += ad * dml;
    mu_hi += ad * dmh;
  }

  if (!x.allFinite() || !lambda.allFinite()) return out;
  out.x = x;
  out.lambda = lambda;
  out.mu_lo = mu_lo;
  out.mu_hi = mu_hi;
  out.elastic = p.sum() + q.sum();
  out.ok = true;
  return out;
}

double violation_l1(const Vec& c, const Vec& cl, const Vec& cu) {
  double acc = 0.0;
  for (int r = 0; r < c.size(); ++r)
    acc += std::max(0.0, cl[r] - c[r]) + std::max(0.0, c[r] - cu[r]);
  return acc;
}

double violation_inf(const Vec& c, const Vec& cl, const Vec& cu) {
  double acc = 0.0;
  for (int r = 0; r < c.size(); ++r)
    acc = std::max(acc, std::max(0.0, cl[r] - c[r]) + std::max(0.0, c[r] - cu[r]));
  return acc;
}

}  // namespace

SolveOutcome solve(const NlpProblem& nlp, const Vec& z0, const SolverOptions& opts) {
  if (!(opts.kkt_tolerance > 0.0) || !(opts.feasibility_tolerance > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (opts.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  const int n = nlp.n, m = nlp.m;
  SolveOutcome out;

  // Ranged rows get a slack column so the QP only sees equalities.
  std::vector<int> slack_of_row(m, -1);
  int n_slack = 0;
  for (int r = 0; r < m; ++r)
    if (nlp.c_upper[r] - nlp.c_lower[r] > 1e-14) slack_of_row[r] = n + n_slack++;
  const int N = n + n_slack;

  Vec z = z0.cwiseMax(nlp.x_lower).cwiseMin(nlp.x_upper);
  const JacobianSparsity sp = analyze_pattern(m, n, nlp.jacobian_pattern);

  double f = nlp.objective(z);
  Vec c = nlp.constraints(z);
  Vec g = fd_gradient(nlp.objective, z, nlp.x_lower, nlp.x_upper, opts.fd_step);
  Eigen::SparseMatrix<double> jac = fd_jacobian(nlp, z, c, sp, opts.fd_step);

  auto derivatives_finite = [](const Vec& grad, const Eigen::SparseMatrix<double>& j) {
    return grad.allFinite() &&
           Eigen::Map<const Vec>(j.valuePtr(), j.nonZeros()).allFinite();
  };
  if (!std::isfinite(f) || !c.allFinite() || !derivatives_finite(g, jac)) {
    out.z = z;
    out.status = SolveStatus::failed;
    return out;
  }

  Mat B = Mat::Identity(n, n);
  bool first_update = true;
  bool reset_used = false;
  int crawl_count = 0;
  double nu = opts.penalty_init;
  double kkt = kInf, viol = kInf;
  Vec lambda = Vec::Zero(m);

  Mat Q = Mat::Zero(N, N);
  Mat A = Mat::Zero(m, N);
  Vec cq = Vec::Zero(N), b = Vec::Zero(m), l = Vec::Zero(N), u = Vec::Zero(N);

  out.status = SolveStatus::max_iterations;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    viol = violation_inf(c, nlp.c_lower, nlp.c_upper);
    const double viol1 = violation_l1(c, nlp.c_lower, nlp.c_upper);

    // QP data at the current point.
    Q.setZero();
    Q.topLeftCorner(n, n) = B;
    Q.diagonal().tail(n_slack).setConstant(1e-10);
    A.setZero();
    for (int col = 0; col < n; ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(jac, col); it; ++it)
        A(it.row(), col) = it.value();
    for (int r = 0; r < m; ++r)
      if (slack_of_row[r] >= 0) A(r, slack_of_row[r]) = -1.0;
    cq.setZero();
    cq.head(n) = g;
    for (int i = 0; i < n; ++i) {
      l[i] = nlp.x_lower[i] - z[i];
      u[i] = nlp.x_upper[i] - z[i];
    }
    for (int r = 0; r < m; ++r) {
      if (slack_of_row[r] >= 0) {
        l[slack_of_row[r]] = nlp.c_lower[r];
        u[slack_of_row[r]] = nlp.c_upper[r];
        b[r] = -c[r];
      } else {
        b[r] = nlp.c_lower[r] - c[r];
      }
    }

    QpResult qp;
    double dphi = 0.0;
    Vec d;
    for (int attempt = 0;; ++attempt) {
      qp = solve_qp({Q, A, cq, b, l, u, nu});
      if (!qp.ok) {
        out.status = SolveStatus::failed;
        break;
      }
      d = qp.x.head(n);
      dphi = g.dot(d) - nu * viol1;
      const bool escalate = (qp.elastic > std::max(1e-8, 1e-6 * viol1) || dphi > -1e-14) &&
                            viol1 > opts.feasibility_tolerance && nu < 1e10 && attempt < 4;
      if (!escalate) break;
      nu *= 10.0;
    }
    if (out.status == SolveStatus::failed) break;
    lambda = qp.lambda;

    // Keep the penalty dominant over the multipliers, but only trust them
    // when the elastic was inactive: with the elastic active they saturate
    // at the cap +-nu, and chasing that ratchets the penalty up forever.
    // Conversely, deflate a penalty inflated during an infeasible phase back
    // toward the multiplier scale (with generous hysteresis); an oversized
    // penalty strangles the step size because the violation's second-order
    // growth dominates the merit.
    const double lam_inf = m > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0;
    const bool genuine_multipliers = qp.elastic <= 1e-8;
    if (genuine_multipliers && nu < 1.1 * lam_inf)
      nu = 1.2 * lam_inf + 1.0;
    else if (genuine_multipliers && nu > 30.0 * (lam_inf + 1.0))
      nu = 5.0 * (lam_inf + 1.0);

    Vec stat = g;
    if (m > 0) stat -= jac.transpose() * lambda;
    stat -= qp.mu_lo.head(n);
    stat += qp.mu_hi.head(n);
    const double dual_scale =
        std::max({1.0, lam_inf, qp.mu_lo.head(n).maxCoeff(), qp.mu_hi.head(n).maxCoeff()});
    kkt = stat.cwiseAbs().maxCoeff() / dual_scale;

    if (opts.verbosity > 0 && opts.log)
      (*opts.log) << "iter " << iter << " f " << f << " viol " << viol << " kkt " << kkt
                  << " nu " << nu << "\n";
    if (opts.keep_trace)
      out.trace.push_back({iter, f, viol, f + nu * viol1, 0.0, nu, kkt});

    if (viol <= opts.feasibility_tolerance && kkt <= opts.kkt_tolerance) {
      out.status = SolveStatus::optimal;
      break;
    }

    // l1 merit line search along d. When the full step fails, try one
    // second-order correction before backtracking: the l1 merit otherwise
    // rejects good steps whose only fault is the constraints' curvature
    // (Maratos effect), which strangles convergence near the manifold.
    dphi = g.dot(d) - nu * viol1;
    const double phi0 = f + nu * viol1;
    auto merit_at = [&](const Vec& zz, double& ff, Vec& cc) {
      ff = nlp.objective(zz);
      cc = nlp.constraints(zz);
      return ff + nu * violation_l1(cc, nlp.c_lower, nlp.c_upper);
    };
    double alpha = 1.0;
    bool accepted = false;
    Vec z_t, c_t;
    double f_t = 0.0;
    while (alpha >= 1e-12) {
      z_t = (z + alpha * d).cwiseMax(nlp.x_lower).cwiseMin(nlp.x_upper);
      const double phi_t = merit_at(z_t, f_t, c_t);
      if (phi_t <= phi0 + 1e-4 * alpha * std::min(dphi, 0.0)) {
        accepted = true;
        break;
      }
      if (alpha == 1.0 && m > 0 && c_t.allFinite()) {
        // Least-norm step cancelling the curvature residual c(z+d) - c - Jd.
        Vec r = c_t - c - jac * d;
        Mat jjt = Mat(Eigen::SparseMatrix<double>(jac * jac.transpose()));
        jjt.diagonal().array() += 1e-10 * (1.0 + jjt.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<Mat> jfac(jjt);
        if (jfac.info() == Eigen::Success) {
          const Vec p = jac.transpose() * jfac.solve(-r);
          const Vec z_s = (z + d + p).cwiseMax(nlp.x_lower).cwiseMin(nlp.x_upper);
          double f_s;
          Vec c_s;
          const double phi_s = merit_at(z_s, f_s, c_s);
          if (phi_s <= phi0 + 1e-4 * std::min(dphi, 0.0)) {
            z_t = z_s;
            f_t = f_s;
            c_t = c_s;
            accepted = true;
            break;
          }
        }
      }
      alpha *= 0.5;
    }
    if (opts.keep_trace && !out.trace.empty()) out.trace.back().step = accepted ? alpha : 0.0;

    if (!accepted) {
      if (!reset_used) {
        // Stale curvature can poison the direction; retry once from scratch.
        B = Mat::Identity(n, n);
        first_update = true;
        reset_used = true;
        continue;
      }
      out.status = SolveStatus::line_search_failure;
      break;
    }
    reset_used = false;

    // A run of microscopic accepted steps is the same poisoning in slow
    // motion (the search "succeeds" on sub-noise merit decreases while the
    // direction is garbage); a streak triggers the same restart.
    crawl_count = alpha <= 1.0 / 1024.0 ? crawl_count + 1 : 0;
    if (crawl_count >= 10) {
      B = Mat::Identity(n, n);
      first_update = true;
      crawl_count = 0;
    }

    const Vec s = z_t - z;
    const Vec g_new = fd_gradient(nlp.objective, z_t, nlp.x_lower, nlp.x_upper, opts.fd_step);
    const Eigen::SparseMatrix<double> jac_new = fd_jacobian(nlp, z_t, c_t, sp, opts.fd_step);
    if (!derivatives_finite(g_new, jac_new)) {
      out.status = SolveStatus::failed;
      break;
    }

    Vec y = g_new - g;
    if (m > 0) y -= (jac_new.transpose() * lambda - jac.transpose() * lambda);

    // Damped BFGS; the first genuine pair rescales the identity seed.
    const Vec Bs = B * s;
    const double sBs = s.dot(Bs);
    double sy = s.dot(y);
    if (sBs > 1e-16) {
      if (first_update && sy > 1e-12 * s.norm() * y.norm()) {
        const double scale = y.squaredNorm() / sy;
        if (std::isfinite(scale) && scale > 1e-8 && scale < 1e12) {
          B *= scale;
          first_update = false;
        }
      }
      const Vec Bs2 = B * s;
      const double sBs2 = s.dot(Bs2);
      Vec y_eff = y;
      sy = s.dot(y);
      if (sy < 0.2 * sBs2) {
        const double theta = 0.8 * sBs2 / (sBs2 - sy);
        y_eff = theta * y + (1.0 - theta) * Bs2;
        sy = s.dot(y_eff);
      }
      if (sy > 1e-14 * std::max(1.0, sBs2))
        B += (y_eff * y_eff.transpose()) / sy - (Bs2 * Bs2.transpose()) / sBs2;
    }

    z = z_t;
    f = f_t;
    c = c_t;
    g = g_new;
    jac = jac_new;
  }

  out.z = z;
  out.objective = f;
  out.kkt_residual = kkt;
  out.constraint_violation = violation_inf(c, nlp.c_lower, nlp.c_upper);
  out.multipliers = lambda;
  out.iterations = iter;
  return out;
}

}  // namespace rocs
