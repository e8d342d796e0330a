#include "rocs/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace rocs {
namespace {

// Everything the constraint/objective closures need, computed once per mesh.
struct MeshData {
  std::vector<CollocationGrid> grids;
  std::vector<Vec> tau_at_colloc;  // per interval, tau of each collocation point
  std::vector<double> beta;        // half widths
};

std::shared_ptr<const MeshData> build_mesh_data(const Mesh& mesh) {
  auto md = std::make_shared<MeshData>();
  const int K = mesh.intervals();
  md->grids.reserve(K);
  md->tau_at_colloc.reserve(K);
  md->beta.reserve(K);
  for (int k = 0; k < K; ++k) {
    md->grids.push_back(make_grid(mesh.colloc[k]));
    const auto& g = md->grids.back();
    Vec tau(g.n);
    for (int i = 0; i < g.n; ++i)
      tau[i] = zeta_to_tau(g.points[i], mesh.points[k], mesh.points[k + 1]);
    md->tau_at_colloc.push_back(std::move(tau));
    md->beta.push_back(mesh.half_width(k));
  }
  return md;
}

double objective_value(const OcpDefinition& ocp, const DecisionLayout& lay, const MeshData& md,
                       const Vec& z) {
  const double t0 = lay.t0_of(z), tf = lay.tf_of(z);
  const double alpha = 0.5 * (tf - t0);
  const int last = lay.n_state_points - 1;
  Vec x0 = Vec(lay.n_x), xf = Vec(lay.n_x);
  for (int i = 0; i < lay.n_x; ++i) {
    x0[i] = z[lay.state_index(0, i)];
    xf[i] = z[lay.state_index(last, i)];
  }
  double j = ocp.mayer(x0, t0, xf, tf);
  Vec x(lay.n_x), u(lay.n_u);
  for (int k = 0; k < lay.mesh.intervals(); ++k) {
    const auto& g = md.grids[k];
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
      const int p = lay.first_point[k] + i;
      for (int c = 0; c < lay.n_x; ++c) x[c] = z[lay.state_index(p, c)];
      for (int c = 0; c < lay.n_u; ++c) u[c] = z[lay.control_index(p, c)];
      acc += g.weights[i] * ocp.lagrange(x, u, md.tau_at_colloc[k][i]);
    }
    j += alpha * md.beta[k] * acc;
  }
  return j;
}

}  // namespace

Transcription assemble(const OcpDefinition& ocp, const Mesh& mesh) {
  mesh.validate();
  Transcription tr;
  DecisionLayout& lay = tr.layout;
  lay.mesh = mesh;
  lay.n_x = ocp.n_x;
  lay.n_u = ocp.n_u;
  const int K = mesh.intervals();
  lay.first_point.resize(K);
  int acc = 0;
  for (int k = 0; k < K; ++k) {
    lay.first_point[k] = acc;
    acc += mesh.colloc[k];
  }
  lay.n_colloc = acc;
  lay.n_state_points = acc + 1;
  lay.control_offset = lay.n_state_points * lay.n_x;
  int dim = lay.control_offset + lay.n_colloc * lay.n_u;
  if (ocp.t0_bounds.fixed()) {
    lay.t0_fixed = ocp.t0_bounds.lower;
  } else {
    lay.t0_index = dim++;
  }
  if (ocp.tf_bounds.fixed()) {
    lay.tf_fixed = ocp.tf_bounds.lower;
  } else {
    lay.tf_index = dim++;
  }
  lay.dimension = dim;

  auto md = build_mesh_data(mesh);

  NlpProblem& nlp = tr.nlp;
  nlp.n = dim;
  nlp.x_lower.resize(dim);
  nlp.x_upper.resize(dim);
  for (int p = 0; p < lay.n_state_points; ++p) {
    for (int c = 0; c < lay.n_x; ++c) {
      nlp.x_lower[lay.state_index(p, c)] = ocp.x_lower[c];
      nlp.x_upper[lay.state_index(p, c)] = ocp.x_upper[c];
    }
  }
  for (int p = 0; p < lay.n_colloc; ++p) {
    for (int c = 0; c < lay.n_u; ++c) {
      nlp.x_lower[lay.control_index(p, c)] = ocp.u_lower[c];
      nlp.x_upper[lay.control_index(p, c)] = ocp.u_upper[c];
    }
  }
  if (lay.t0_index >= 0) {
    nlp.x_lower[lay.t0_index] = ocp.t0_bounds.lower;
    nlp.x_upper[lay.t0_index] = ocp.t0_bounds.upper;
  }
  if (lay.tf_index >= 0) {
    nlp.x_lower[lay.tf_index] = ocp.tf_bounds.lower;
    nlp.x_upper[lay.tf_index] = ocp.tf_bounds.upper;
  }

  const int n_defect = lay.n_colloc * lay.n_x;
  const int n_path = lay.n_colloc * ocp.n_c;
  nlp.m = n_defect + n_path + ocp.n_b;
  nlp.c_lower.resize(nlp.m);
  nlp.c_upper.resize(nlp.m);
  nlp.c_lower.head(n_defect).setZero();
  nlp.c_upper.head(n_defect).setZero();
  for (int p = 0; p < lay.n_colloc; ++p) {
    nlp.c_lower.segment(n_defect + p * ocp.n_c, ocp.n_c) = ocp.path_lower;
    nlp.c_upper.segment(n_defect + p * ocp.n_c, ocp.n_c) = ocp.path_upper;
  }
  nlp.c_lower.tail(ocp.n_b) = ocp.boundary_lower;
  nlp.c_upper.tail(ocp.n_b) = ocp.boundary_upper;

  const OcpDefinition ocp_copy = ocp;
  const DecisionLayout lay_copy = lay;
  nlp.objective = [ocp_copy, lay_copy, md](const Vec& z) {
    return objective_value(ocp_copy, lay_copy, *md, z);
  };

  nlp.constraints = [ocp_copy, lay_copy, md, n_defect, n_path](const Vec& z) {
    const auto& lay = lay_copy;
    const double t0 = lay.t0_of(z), tf = lay.tf_of(z);
    const double alpha = 0.5 * (tf - t0);
    Vec c(n_defect + n_path + ocp_copy.n_b);
    Vec x(lay.n_x), u(lay.n_u);
    int row = 0, prow = n_defect;
    for (int k = 0; k < lay.mesh.intervals(); ++k) {
      const auto& g = md->grids[k];
      const double ab = alpha * md->beta[k];
      const int s0 = lay.first_point[k];
      for (int i = 0; i < g.n; ++i) {
        const int p = s0 + i;
        for (int cc = 0; cc < lay.n_x; ++cc) x[cc] = z[lay.state_index(p, cc)];
        for (int cc = 0; cc < lay.n_u; ++cc) u[cc] = z[lay.control_index(p, cc)];
        const Vec f = ocp_copy.dynamics(x, u, md->tau_at_colloc[k][i]);
        for (int comp = 0; comp < lay.n_x; ++comp) {
          double d = 0.0;
          for (int j = 0; j <= g.n; ++j)
            d += g.diff_matrix(i, j) * z[lay.state_index(s0 + j, comp)];
          c[row++] = d - ab * f[comp];
        }
        if (ocp_copy.n_c > 0) {
          const Vec pc = ocp_copy.path(x, u, md->tau_at_colloc[k][i]);
          c.segment(prow, ocp_copy.n_c) = pc;
          prow += ocp_copy.n_c;
        }
      }
    }
    if (ocp_copy.n_b > 0) {
      Vec x0(lay.n_x), xl(lay.n_x);
      for (int i = 0; i < lay.n_x; ++i) {
        x0[i] = z[lay.state_index(0, i)];
        xl[i] = z[lay.state_index(lay.n_state_points - 1, i)];
      }
      c.tail(ocp_copy.n_b) = ocp_copy.boundary(x0, t0, xl, tf);
    }
    return c;
  };

  // Sparsity superset. Defect row (k, i, comp) touches the D-stencil of its
  // component, the full state/control block of its collocation point, and
  // any free endpoint time.
  auto& pat = nlp.jacobian_pattern;
  int row = 0;
  for (int k = 0; k < K; ++k) {
    const int nk = mesh.colloc[k];
    const int s0 = lay.first_point[k];
    for (int i = 0; i < nk; ++i) {
      for (int comp = 0; comp < lay.n_x; ++comp, ++row) {
        for (int j = 0; j <= nk; ++j) pat.emplace_back(row, lay.state_index(s0 + j, comp));
        for (int cc = 0; cc < lay.n_x; ++cc)
          if (cc != comp) pat.emplace_back(row, lay.state_index(s0 + i, cc));
        for (int cc = 0; cc < lay.n_u; ++cc)
          pat.emplace_back(row, lay.control_index(s0 + i, cc));
        if (lay.t0_index >= 0) pat.emplace_back(row, lay.t0_index);
        if (lay.tf_index >= 0) pat.emplace_back(row, lay.tf_index);
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const int nk = mesh.colloc[k];
    const int s0 = lay.first_point[k];
    for (int i = 0; i < nk; ++i) {
      for (int r = 0; r < ocp.n_c; ++r, ++row) {
        for (int cc = 0; cc < lay.n_x; ++cc) pat.emplace_back(row, lay.state_index(s0 + i, cc));
        for (int cc = 0; cc < lay.n_u; ++cc)
          pat.emplace_back(row, lay.control_index(s0 + i, cc));
      }
    }
  }
  for (int r = 0; r < ocp.n_b; ++r, ++row) {
    for (int cc = 0; cc < lay.n_x; ++cc) {
      pat.emplace_back(row, lay.state_index(0, cc));
      pat.emplace_back(row, lay.state_index(lay.n_state_points - 1, cc));
    }
    if (lay.t0_index >= 0) pat.emplace_back(row, lay.t0_index);
    if (lay.tf_index >= 0) pat.emplace_back(row, lay.tf_index);
  }
  std::sort(pat.begin(), pat.end());
  pat.erase(std::unique(pat.begin(), pat.end()), pat.end());
  return tr;
}

Vec initial_guess(const OcpDefinition& ocp, const DecisionLayout& lay) {
  Vec z = Vec::Zero(lay.dimension);
  const Mesh& mesh = lay.mesh;
  const int K = mesh.intervals();

  // tau of every global state point.
  Vec tau(lay.n_state_points);
  for (int k = 0; k < K; ++k) {
    const auto g = make_grid(mesh.colloc[k]);
    for (int j = 0; j <= g.n; ++j)
      tau[lay.first_point[k] + j] =
          zeta_to_tau(g.aug_points[j], mesh.points[k], mesh.points[k + 1]);
  }

  auto clamp = [](double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); };
  for (int c = 0; c < lay.n_x; ++c) {
    const auto& a = ocp.x0_value[c];
    const auto& b = ocp.xf_value[c];
    for (int p = 0; p < lay.n_state_points; ++p) {
      double v = 0.0;
      if (a && b)
        v = *a + (*b - *a) * 0.5 * (tau[p] + 1.0);
      else if (a)
        v = *a;
      else if (b)
        v = *b;
      z[lay.state_index(p, c)] = clamp(v, ocp.x_lower[c], ocp.x_upper[c]);
    }
  }
  for (int p = 0; p < lay.n_colloc; ++p) {
    for (int c = 0; c < lay.n_u; ++c) {
      double v = 0.0;
      if (std::isfinite(ocp.u_lower[c]) && std::isfinite(ocp.u_upper[c]))
        v = clamp(0.0, ocp.u_lower[c], ocp.u_upper[c]);
      z[lay.control_index(p, c)] = v;
    }
  }
  auto mid = [](const Bound& b) {
    if (std::isfinite(b.lower) && std::isfinite(b.upper)) return 0.5 * (b.lower + b.upper);
    if (std::isfinite(b.lower)) return b.lower + 1.0;
    if (std::isfinite(b.upper)) return b.upper - 1.0;
    return 1.0;
  };
  if (lay.t0_index >= 0) z[lay.t0_index] = mid(ocp.t0_bounds);
  if (lay.tf_index >= 0) z[lay.tf_index] = mid(ocp.tf_bounds);
  return z;
}

CollocationSolution extract(const OcpDefinition& ocp, const DecisionLayout& lay, const Vec& z) {
  if (z.size() != lay.dimension) throw std::invalid_argument("extract: wrong vector length");
  CollocationSolution sol;
  sol.mesh = lay.mesh;
  sol.t0 = lay.t0_of(z);
  sol.tf = lay.tf_of(z);
  if (!(sol.tf > sol.t0)) throw std::runtime_error("extract: tf <= t0");
  sol.states.resize(lay.n_state_points, lay.n_x);
  sol.controls.resize(lay.n_colloc, std::max(lay.n_u, 0));
  for (int p = 0; p < lay.n_state_points; ++p)
    for (int c = 0; c < lay.n_x; ++c) sol.states(p, c) = z[lay.state_index(p, c)];
  for (int p = 0; p < lay.n_colloc; ++p)
    for (int c = 0; c < lay.n_u; ++c) sol.controls(p, c) = z[lay.control_index(p, c)];
  const auto md = build_mesh_data(lay.mesh);
  sol.objective = objective_value(ocp, lay, *md, z);
  return sol;
}

Vec pack(const DecisionLayout& lay, const CollocationSolution& sol) {
  Vec z = Vec::Zero(lay.dimension);
  for (int p = 0; p < lay.n_state_points; ++p)
    for (int c = 0; c < lay.n_x; ++c) z[lay.state_index(p, c)] = sol.states(p, c);
  for (int p = 0; p < lay.n_colloc; ++p)
    for (int c = 0; c < lay.n_u; ++c) z[lay.control_index(p, c)] = sol.controls(p, c);
  if (lay.t0_index >= 0) z[lay.t0_index] = sol.t0;
  if (lay.tf_index >= 0) z[lay.tf_index] = sol.tf;
  return z;
}

Interpolant state_interpolant(const CollocationSolution& sol, int k) {
  const auto g = make_grid(sol.mesh.colloc[k]);
  int s0 = 0;
  for (int kk = 0; kk < k; ++kk) s0 += sol.mesh.colloc[kk];
  return Interpolant(g.aug_points, sol.states.block(s0, 0, g.n + 1, sol.states.cols()));
}

}  // namespace rocs
