#include "rocs/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rocs/error_estimate.hpp"
#include "rocs/problem_file.hpp"
#include "rocs/problems.hpp"

namespace rocs {

namespace {

bool wants(const std::vector<std::string>& formats, const std::string& f) {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

std::string json_quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string num_array(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  out += ']';
  return out;
}

std::string num_array(const Vec& v) {
  return num_array(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string int_array(const std::vector<int>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  out += ']';
  return out;
}

/// Matrix as an array of row arrays.
std::string row_arrays(const Mat& m, const std::string& indent) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    out += i ? ",\n" : "\n";
    out += indent + "  [";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ", ";
      out += format_double(m(i, j));
    }
    out += ']';
  }
  out += '\n' + indent + ']';
  return out;
}

/// Index of the mesh interval containing tau; ties at interior mesh points
/// resolve to the interval on the right, tau = +1 to the last interval.
int containing_interval(const Mesh& mesh, double tau) {
  const auto& p = mesh.points;
  auto it = std::upper_bound(p.begin(), p.end(), tau);
  int k = int(it - p.begin()) - 1;
  return std::clamp(k, 0, mesh.intervals() - 1);
}

/// Row of sim.zeta closest to z. The overlay nodes were required landing
/// points of the march, so the match is exact up to roundoff.
int nearest_row(const Vec& zeta, double z) {
  int best = 0;
  double dist = std::abs(zeta(0) - z);
  for (int i = 1; i < zeta.size(); ++i) {
    const double d = std::abs(zeta(i) - z);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return best;
}

OverlayTrace make_trace(const CollocationSolution& sol, int k, const IntervalSim& sim,
                        const std::string& direction) {
  OverlayTrace trace;
  trace.interval = k;
  trace.direction = direction;
  const CollocationGrid grid = make_grid(sol.mesh.colloc[k]);
  const Interpolant poly = state_interpolant(sol, k);
  const int rows = int(grid.aug_points.size());
  trace.tau.resize(rows);
  trace.simulated.resize(rows, sol.states.cols());
  trace.collocated.resize(rows, sol.states.cols());
  for (int i = 0; i < rows; ++i) {
    const double z = grid.aug_points(i);
    const int row = nearest_row(sim.zeta, z);
    trace.tau[i] = sim.tau(row);
    trace.simulated.row(i) = sim.y.row(row);
    trace.collocated.row(i) = poly.eval(z);
  }
  return trace;
}

bool write_text_file(const std::filesystem::path& path, const std::string& text,
                     std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) {
    err << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

}  // namespace

std::string validate_config(const RunConfig& config) {
  if (config.problem.empty()) return "problem must not be empty";
  if (config.n_min < 2) return "n_min must be at least 2";
  if (config.n_max < config.n_min) return "n_max must be >= n_min";
  if (config.n_max > 64) return "n_max must be <= 64";
  if (!(config.mesh_tol > 0)) return "mesh-tol must be positive";
  if (!(config.ode_tol > 0)) return "ode-tol must be positive";
  if (!(config.nlp_tol > 0)) return "nlp-tol must be positive";
  if (config.max_iters < 1) return "max-iters must be positive";
  try {
    integrator_from_name(config.integrator);
    direction_from_name(config.direction);
  } catch (const std::exception& e) {
    return e.what();
  }
  for (const auto& f : config.formats)
    if (f != "json" && f != "csv") return "unknown format '" + f + "' (expected json or csv)";
  return {};
}

OcpDefinition resolve_problem(const std::string& token) {
  if (token == "robot_arm") return robot_arm();
  if (token == "hyper_sensitive") return hyper_sensitive();
  if (token == "supersonic_climb") return supersonic_climb();
  if (token.rfind("file:", 0) == 0) return load_problem_file(token.substr(5));
  throw std::invalid_argument("unknown problem '" + token +
                              "' (expected robot_arm, hyper_sensitive, supersonic_climb, "
                              "or file:<path>)");
}

Certificate certify(const OcpDefinition& ocp, const RunResult& result,
                    const SimOptions& sim) {
  Certificate cert;
  if (!result.has_solution) return cert;
  const CollocationSolution& sol = result.solution;
  // The effective policy after any automatic direction drop; re-running a
  // direction the driver had to skip would only reproduce the failure.
  const DirectionPolicy policy = result.report.policy;
  const bool run_fwd = policy != DirectionPolicy::backward_only;
  const bool run_bwd = policy != DirectionPolicy::forward_only;
  const Vec gamma = scaling_factors(sol);
  cert.e_max = 0.0;
  for (int k = 0; k < sol.mesh.intervals(); ++k) {
    IntervalSim fwd, bwd;
    if (run_fwd) fwd = simulate_ivp(ocp, sol, k, sim);
    if (run_bwd) bwd = simulate_tvp(ocp, sol, k, sim);
    const IntervalErrorInfo info = interval_error_info(sol, k, run_fwd ? &fwd : nullptr,
                                                       run_bwd ? &bwd : nullptr, gamma);
    if (info.usable())
      cert.e_max = std::max(cert.e_max, info.e_max);
    else
      cert.e_max = std::numeric_limits<double>::infinity();
    if (run_fwd && fwd.ok) cert.traces.push_back(make_trace(sol, k, fwd, "forward"));
    if (run_bwd && bwd.ok) cert.traces.push_back(make_trace(sol, k, bwd, "backward"));
  }
  return cert;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_report_json(const RunConfig& config, const RunResult& result,
                               const Certificate& certificate) {
  std::string out = "{\n";
  out += "  \"config\": {\n";
  out += "    \"problem\": " + json_quote(config.problem) + ",\n";
  out += "    \"n_min\": " + std::to_string(config.n_min) + ",\n";
  out += "    \"n_max\": " + std::to_string(config.n_max) + ",\n";
  out += "    \"integrator\": " + json_quote(config.integrator) + ",\n";
  out += "    \"mesh_tol\": " + format_double(config.mesh_tol) + ",\n";
  out += "    \"ode_tol\": " + format_double(config.ode_tol) + ",\n";
  out += "    \"nlp_tol\": " + format_double(config.nlp_tol) + ",\n";
  out += "    \"max_iters\": " + std::to_string(config.max_iters) + ",\n";
  out += "    \"direction\": " + json_quote(config.direction) + ",\n";
  out += "    \"output_dir\": " + json_quote(config.output_dir) + ",\n";
  out += "    \"formats\": [";
  for (size_t i = 0; i < config.formats.size(); ++i) {
    if (i) out += ", ";
    out += json_quote(config.formats[i]);
  }
  out += "]\n  },\n";
  out += "  \"status\": " + json_quote(to_string(result.status)) + ",\n";
  out += "  \"message\": " + json_quote(result.message) + ",\n";
  out += "  \"propagation\": {\n";
  out += "    \"policy\": " + json_quote(to_string(result.report.policy)) + ",\n";
  out += "    \"forward_skipped\": " + std::string(result.report.forward_skipped ? "true" : "false") + ",\n";
  out += "    \"backward_skipped\": " + std::string(result.report.backward_skipped ? "true" : "false") + ",\n";
  out += "    \"forward_skip_reason\": " + json_quote(result.report.forward_skip_reason) + ",\n";
  out += "    \"backward_skip_reason\": " + json_quote(result.report.backward_skip_reason) + "\n";
  out += "  },\n";

  out += "  \"iterations\": [";
  for (size_t i = 0; i < result.history.size(); ++i) {
    const MeshIteration& it = result.history[i];
    out += i ? ",\n" : "\n";
    out += "    {\n";
    out += "      \"iteration\": " + std::to_string(it.iteration) + ",\n";
    out += "      \"intervals\": " + std::to_string(it.intervals) + ",\n";
    out += "      \"total_collocation\": " + std::to_string(it.total_colloc) + ",\n";
    out += "      \"e_max\": " + format_double(it.e_max) + ",\n";
    out += "      \"residual_max\": " + format_double(it.residual_max) + ",\n";
    out += "      \"objective\": " + format_double(it.objective) + ",\n";
    out += "      \"nlp_status\": " + json_quote(it.nlp_status) + ",\n";
    out += "      \"nlp_iterations\": " + std::to_string(it.nlp_iterations) + ",\n";
    out += "      \"wall_time_s\": " + format_double(it.wall_seconds) + ",\n";
    out += "      \"interval_errors\": " + num_array(it.interval_errors) + "\n";
    out += "    }";
  }
  out += "\n  ],\n";

  if (!result.has_solution) {
    out += "  \"final\": null\n}\n";
    return out;
  }

  const CollocationSolution& sol = result.solution;
  const int n_x = int(sol.states.cols());
  const int n_u = int(sol.controls.cols());
  out += "  \"final\": {\n";
  out += "    \"objective\": " + format_double(sol.objective) + ",\n";
  out += "    \"t0\": " + format_double(sol.t0) + ",\n";
  out += "    \"tf\": " + format_double(sol.tf) + ",\n";
  out += "    \"mesh_points\": " + num_array(sol.mesh.points) + ",\n";
  out += "    \"colloc_counts\": " + int_array(sol.mesh.colloc) + ",\n";
  out += "    \"e_max\": " + format_double(result.report.max_error()) + ",\n";
  out += "    \"certified_e_max\": " + format_double(certificate.e_max) + ",\n";

  // The solution resampled through the per-interval interpolants on a
  // uniform 1000-point tau grid, one array per state and control component.
  const int kSamples = 1000;
  std::vector<double> taus(kSamples);
  Mat xs(kSamples, n_x), us(kSamples, n_u);
  int k_prev = -1;
  Interpolant state_poly, control_poly;
  for (int j = 0; j < kSamples; ++j) {
    const double tau = -1.0 + 2.0 * j / (kSamples - 1);
    taus[j] = tau;
    const int k = containing_interval(sol.mesh, tau);
    if (k != k_prev) {
      state_poly = state_interpolant(sol, k);
      control_poly = control_interpolant(sol, k);
      k_prev = k;
    }
    const double z = tau_to_zeta(tau, sol.mesh.points[k], sol.mesh.points[k + 1]);
    xs.row(j) = state_poly.eval(z);
    us.row(j) = control_poly.eval(z);
  }
  out += "    \"solution\": {\n";
  out += "      \"tau\": " + num_array(taus) + ",\n";
  out += "      \"states\": [";
  for (int i = 0; i < n_x; ++i) {
    if (i) out += ", ";
    out += '\n' + std::string(8, ' ') + num_array(Vec(xs.col(i)));
  }
  out += "\n      ],\n";
  out += "      \"controls\": [";
  for (int i = 0; i < n_u; ++i) {
    if (i) out += ", ";
    out += '\n' + std::string(8, ' ') + num_array(Vec(us.col(i)));
  }
  out += "\n      ]\n    },\n";

  out += "    \"overlay\": [";
  for (size_t i = 0; i < certificate.traces.size(); ++i) {
    const OverlayTrace& trace = certificate.traces[i];
    out += i ? ",\n" : "\n";
    out += "      {\n";
    out += "        \"interval\": " + std::to_string(trace.interval) + ",\n";
    out += "        \"direction\": " + json_quote(trace.direction) + ",\n";
    out += "        \"tau\": " + num_array(trace.tau) + ",\n";
    out += "        \"simulated\": " + row_arrays(trace.simulated, "        ") + ",\n";
    out += "        \"collocated\": " + row_arrays(trace.collocated, "        ") + "\n";
    out += "      }";
  }
  out += "\n    ]\n  }\n}\n";
  return out;
}

std::string render_history_csv(const RunResult& result) {
  std::string out = "iteration,tau\n";
  for (const MeshIteration& it : result.history)
    for (double tau : it.mesh.points)
      out += std::to_string(it.iteration) + "," + format_double(tau) + "\n";
  return out;
}

std::string render_meshes_json(const RunResult& result) {
  std::string out = "{\n  \"iterations\": [";
  for (size_t i = 0; i < result.history.size(); ++i) {
    const MeshIteration& it = result.history[i];
    out += i ? ",\n" : "\n";
    out += "    {\n";
    out += "      \"iteration\": " + std::to_string(it.iteration) + ",\n";
    out += "      \"mesh_points\": " + num_array(it.mesh.points) + ",\n";
    out += "      \"colloc_counts\": " + int_array(it.mesh.colloc) + "\n";
    out += "    }";
  }
  out += "\n  ]\n}\n";
  return out;
}

int run(const RunConfig& config, std::ostream& err,
        const std::function<void(const std::string&)>& log) {
  const std::string why = validate_config(config);
  if (!why.empty()) {
    err << "error: " << why << "\n";
    return 1;
  }

  OcpDefinition ocp;
  try {
    ocp = resolve_problem(config.problem);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  namespace fs = std::filesystem;
  const bool want_json = wants(config.formats, "json");
  const bool want_csv = wants(config.formats, "csv");
  const fs::path out_dir(config.output_dir);
  if (want_json || want_csv) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const fs::path probe = out_dir / ".write_probe";
    {
      std::ofstream f(probe);
      if (!f) {
        err << "error: output directory '" << config.output_dir << "' is not writable\n";
        return 1;
      }
    }
    fs::remove(probe, ec);
  }

  RefinementOptions opts;
  opts.n_min = config.n_min;
  opts.n_max = config.n_max;
  opts.mesh_tolerance = config.mesh_tol;
  opts.max_iterations = config.max_iters;
  opts.sim.method = integrator_from_name(config.integrator);
  opts.sim.tolerance = config.ode_tol;
  opts.direction = direction_from_name(config.direction);
  // nlp_tol steers the stationarity target. Feasibility stays tight
  // regardless: the re-simulation certificate can vouch for dynamics, but
  // nothing else rechecks path and boundary rows.
  opts.nlp.kkt_tolerance = config.nlp_tol;
  opts.nlp.feasibility_tolerance = std::min(config.nlp_tol, 1e-8);
  // Cold starts on coarse meshes take several hundred SQP iterations; the
  // driver warm-starts every mesh after the first.
  opts.nlp.max_iterations = 1500;
  opts.log = log;

  const RunResult result = run_adaptive(ocp, initial_mesh(10, config.n_min), opts);

  Certificate certificate;
  if (result.has_solution) certificate = certify(ocp, result, opts.sim);

  bool io_ok = true;
  if (want_json) {
    io_ok &= write_text_file(out_dir / "report.json",
                             render_report_json(config, result, certificate), err);
    io_ok &= write_text_file(out_dir / "meshes.json", render_meshes_json(result), err);
  }
  if (want_csv)
    io_ok &= write_text_file(out_dir / "history.csv", render_history_csv(result), err);
  if (!io_ok) return 1;

  if (result.status != RunStatus::converged)
    err << to_string(result.status) << ": " << result.message << "\n";
  switch (result.status) {
    case RunStatus::converged: return 0;
    case RunStatus::max_iterations: return 2;
    case RunStatus::solver_failure: return 1;
  }
  return 1;
}

}  // namespace rocs
