#pragma once

#include <string>

#include "rocs/ocp.hpp"

namespace rocs {

/// Builds a problem from declarative JSON text. Dynamics, costs, path and
/// boundary rows are expression strings compiled once at load time; see
/// docs/problem_format.md for the key reference. Throws std::invalid_argument
/// with a descriptive message on malformed input.
OcpDefinition problem_from_json_text(const std::string& json_text);

/// Reads and parses a problem file; throws std::invalid_argument when the
/// file cannot be read.
OcpDefinition load_problem_file(const std::string& path);

}  // namespace rocs
