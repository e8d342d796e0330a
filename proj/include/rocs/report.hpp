#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rocs/driver.hpp"

namespace rocs {

/// One benchmark or file-problem run, as configured from the command line.
/// `problem` is a benchmark name (robot_arm, hyper_sensitive,
/// supersonic_climb) or "file:<path>". `formats` selects the artifacts:
/// "json" writes report.json and meshes.json, "csv" writes history.csv; an
/// empty set runs without writing anything.
struct RunConfig {
  std::string problem = "robot_arm";
  int n_min = 2;
  int n_max = 6;
  std::string integrator = "dp54";
  double mesh_tol = 1e-6;
  double ode_tol = 1e-8;
  double nlp_tol = 1e-8;  ///< NLP stationarity target; feasibility stays <= 1e-8
  int max_iters = 40;
  std::string direction = "auto";
  std::string output_dir = ".";
  std::vector<std::string> formats = {"json", "csv"};
};

/// Empty when the config is usable; otherwise the reason it is rejected.
std::string validate_config(const RunConfig& config);

/// Benchmark by name or "file:<path>"; throws std::invalid_argument for
/// unknown names.
OcpDefinition resolve_problem(const std::string& token);

/// Simulated-vs-collocated states of one interval in one direction, sampled
/// at the interval's collocation points plus the right endpoint.
struct OverlayTrace {
  int interval = 0;
  std::string direction;  ///< "forward" or "backward"
  std::vector<double> tau;
  Mat simulated;   ///< one row per tau entry, one column per state
  Mat collocated;  ///< same shape
};

/// Independent re-simulation of a finished run with fresh integrator state:
/// the error estimate recomputed from scratch plus the overlay data.
struct Certificate {
  double e_max = -1.0;
  std::vector<OverlayTrace> traces;
};

Certificate certify(const OcpDefinition& ocp, const RunResult& result, const SimOptions& sim);

/// Fixed-format decimal that round-trips a double (%.17g). Infinities map to
/// the JSON-safe overflow literal 1e999 and NaN to null.
std::string format_double(double v);

std::string render_report_json(const RunConfig& config, const RunResult& result,
                               const Certificate& certificate);
std::string render_history_csv(const RunResult& result);
std::string render_meshes_json(const RunResult& result);

/// Validates, resolves the problem, runs the adaptive loop, writes the
/// requested artifacts into output_dir. Errors (bad config, unknown problem,
/// unwritable output) are reported on `err` with exit code 1 before any
/// solve. Afterwards: exit 0 when converged, 2 when the iteration budget ran
/// out, 1 on solver failure.
int run(const RunConfig& config, std::ostream& err,
        const std::function<void(const std::string&)>& log = {});

}  // namespace rocs
