#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rocs/report.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) out.push_back(token);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Radau collocation solver for optimal control problems.\n"
               "Set ROCS_VERBOSE=1 to stream per-iteration progress to stderr."};
  app.require_subcommand(1);

  rocs::RunConfig config;
  std::string formats = "json,csv";
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem with adaptive mesh refinement");
  solve->add_option("--problem", config.problem,
                    "robot_arm, hyper_sensitive, supersonic_climb, or file:<path>")
      ->capture_default_str();
  solve->add_option("--nmin", config.n_min, "Fewest collocation points per interval")
      ->capture_default_str();
  solve->add_option("--nmax", config.n_max, "Most collocation points per interval")
      ->capture_default_str();
  solve->add_option("--integrator", config.integrator, "dp54 or v98")->capture_default_str();
  solve->add_option("--mesh-tol", config.mesh_tol, "Mesh error tolerance")->capture_default_str();
  solve->add_option("--ode-tol", config.ode_tol, "Simulation error tolerance")
      ->capture_default_str();
  solve->add_option("--nlp-tol", config.nlp_tol, "NLP stationarity tolerance")
      ->capture_default_str();
  solve->add_option("--max-iters", config.max_iters, "Refinement iteration budget")
      ->capture_default_str();
  solve->add_option("--direction", config.direction, "both, forward, backward, or auto")
      ->capture_default_str();
  solve->add_option("--out", config.output_dir, "Directory for the report artifacts")
      ->capture_default_str();
  solve->add_option("--format", formats,
                    "Comma separated artifacts to write: json (report.json, meshes.json) "
                    "and/or csv (history.csv); empty writes nothing")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  config.formats = split_csv(formats);

  std::function<void(const std::string&)> log;
  const char* verbose = std::getenv("ROCS_VERBOSE");
  if (verbose && *verbose && std::string(verbose) != "0")
    log = [](const std::string& line) { std::cerr << line << "\n"; };

  return rocs::run(config, std::cerr, log);
}
