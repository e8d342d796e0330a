#include "rocs/problem_file.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "rocs/expr.hpp"

namespace rocs {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("problem file: " + what);
}

// An absent key falls back to key_missing for every row; a null entry in a
// present array means "unbounded on this side" (null_value).
Vec bound_array(const json& root, const std::string& key, int n, double key_missing,
                double null_value) {
  Vec out = Vec::Constant(n, key_missing);
  if (!root.contains(key)) return out;
  const json& arr = root.at(key);
  if (!arr.is_array() || int(arr.size()) != n)
    fail(key + " must be an array of length " + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (arr[i].is_null())
      out[i] = null_value;
    else if (arr[i].is_number())
      out[i] = arr[i].get<double>();
    else
      fail(key + " entries must be numbers or null");
  }
  return out;
}

Bound time_bound(const json& j, const std::string& key) {
  if (j.is_number()) return Bound::fixed_at(j.get<double>());
  if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      if (k != "lower" && k != "upper") fail(key + ": unknown key \"" + k + "\"");
    Bound b;
    if (j.contains("lower")) b.lower = j.at("lower").get<double>();
    if (j.contains("upper")) b.upper = j.at("upper").get<double>();
    if (b.lower > b.upper) fail(key + ": lower exceeds upper");
    return b;
  }
  fail(key + " must be a number or {lower, upper}");
}

std::vector<Expr> compile_rows(const json& root, const std::string& key,
                               const std::vector<std::string>& vars, int required = -1) {
  std::vector<Expr> rows;
  if (!root.contains(key)) {
    if (required > 0) fail("missing required key \"" + key + "\"");
    return rows;
  }
  const json& arr = root.at(key);
  if (!arr.is_array()) fail(key + " must be an array of expression strings");
  if (required >= 0 && int(arr.size()) != required)
    fail(key + " must have exactly " + std::to_string(required) + " entries");
  for (const json& item : arr) {
    if (!item.is_string()) fail(key + " entries must be strings");
    try {
      rows.push_back(Expr::parse(item.get<std::string>(), vars));
    } catch (const std::invalid_argument& e) {
      fail(key + ": " + e.what());
    }
  }
  return rows;
}

std::optional<Expr> compile_scalar(const json& root, const std::string& key,
                                   const std::vector<std::string>& vars) {
  if (!root.contains(key)) return std::nullopt;
  if (!root.at(key).is_string()) fail(key + " must be an expression string");
  try {
    return Expr::parse(root.at(key).get<std::string>(), vars);
  } catch (const std::invalid_argument& e) {
    fail(key + ": " + e.what());
  }
}

}  // namespace

namespace {
OcpDefinition build_from_json(const json& root);
}  // namespace

OcpDefinition problem_from_json_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  try {
    return build_from_json(root);
  } catch (const json::exception& e) {
    fail(std::string("malformed value: ") + e.what());
  }
}

namespace {
OcpDefinition build_from_json(const json& root) {
  if (!root.is_object()) fail("top level must be an object");

  static const std::set<std::string> known = {
      "name",         "states",         "controls",       "dynamics", "lagrange",
      "mayer",        "boundary",       "boundary_lower", "boundary_upper",
      "path",         "path_lower",     "path_upper",     "x_lower",  "x_upper",
      "u_lower",      "u_upper",        "t0",             "tf",       "x_initial",
      "x_final"};
  for (const auto& [k, v] : root.items())
    if (!known.count(k)) fail("unknown key \"" + k + "\"");

  OcpDefinition ocp;
  ocp.name = root.value("name", std::string("file_problem"));
  if (!root.contains("states") || !root.at("states").is_number_integer())
    fail("\"states\" (integer) is required");
  ocp.n_x = root.at("states").get<int>();
  ocp.n_u = root.value("controls", 0);
  if (ocp.n_x < 1) fail("states must be >= 1");
  if (ocp.n_u < 0) fail("controls must be >= 0");

  // Running-cost and dynamics variables are x<i>, u<j>, tau; endpoint
  // expressions see xi<i> (initial state), xf<i> (final state), t0, tf.
  std::vector<std::string> run_vars, end_vars;
  for (int i = 0; i < ocp.n_x; ++i) run_vars.push_back("x" + std::to_string(i));
  for (int j = 0; j < ocp.n_u; ++j) run_vars.push_back("u" + std::to_string(j));
  run_vars.push_back("tau");
  for (int i = 0; i < ocp.n_x; ++i) end_vars.push_back("xi" + std::to_string(i));
  for (int i = 0; i < ocp.n_x; ++i) end_vars.push_back("xf" + std::to_string(i));
  end_vars.push_back("t0");
  end_vars.push_back("tf");

  const int n_x = ocp.n_x, n_u = ocp.n_u;
  auto run_values = [n_x, n_u](const Vec& x, const Vec& u, double tau) {
    std::vector<double> v(size_t(n_x + n_u) + 1);
    for (int i = 0; i < n_x; ++i) v[size_t(i)] = x[i];
    for (int j = 0; j < n_u; ++j) v[size_t(n_x + j)] = u[j];
    v.back() = tau;
    return v;
  };
  auto end_values = [n_x](const Vec& x0, double t0, const Vec& xf, double tf) {
    std::vector<double> v(2 * size_t(n_x) + 2);
    for (int i = 0; i < n_x; ++i) v[size_t(i)] = x0[i];
    for (int i = 0; i < n_x; ++i) v[size_t(n_x + i)] = xf[i];
    v[2 * size_t(n_x)] = t0;
    v[2 * size_t(n_x) + 1] = tf;
    return v;
  };

  const std::vector<Expr> dyn = compile_rows(root, "dynamics", run_vars, ocp.n_x);
  ocp.dynamics = [dyn, run_values](const Vec& x, const Vec& u, double tau) {
    const auto v = run_values(x, u, tau);
    Vec dx(dyn.size());
    for (size_t i = 0; i < dyn.size(); ++i) dx[Eigen::Index(i)] = dyn[i].eval(v.data());
    return dx;
  };

  if (auto lag = compile_scalar(root, "lagrange", run_vars)) {
    const Expr ex = *lag;
    ocp.lagrange = [ex, run_values](const Vec& x, const Vec& u, double tau) {
      return ex.eval(run_values(x, u, tau).data());
    };
  }
  if (auto may = compile_scalar(root, "mayer", end_vars)) {
    const Expr ex = *may;
    ocp.mayer = [ex, end_values](const Vec& x0, double t0, const Vec& xf, double tf) {
      return ex.eval(end_values(x0, t0, xf, tf).data());
    };
  }

  const std::vector<Expr> path = compile_rows(root, "path", run_vars);
  ocp.n_c = int(path.size());
  if (!path.empty()) {
    ocp.path = [path, run_values](const Vec& x, const Vec& u, double tau) {
      const auto v = run_values(x, u, tau);
      Vec c(path.size());
      for (size_t i = 0; i < path.size(); ++i) c[Eigen::Index(i)] = path[i].eval(v.data());
      return c;
    };
  }
  ocp.path_lower = bound_array(root, "path_lower", ocp.n_c, 0.0, -kInf);
  ocp.path_upper = bound_array(root, "path_upper", ocp.n_c, 0.0, kInf);
  if ((root.contains("path_lower") || root.contains("path_upper")) && path.empty())
    fail("path bounds given without \"path\" rows");

  // Endpoint pins: each non-null x_initial / x_final entry appends an
  // equality boundary row after any explicit boundary expressions, and feeds
  // the initial-guess machinery through x0_value / xf_value.
  ocp.x0_value.assign(size_t(ocp.n_x), std::nullopt);
  ocp.xf_value.assign(size_t(ocp.n_x), std::nullopt);
  for (const char* key : {"x_initial", "x_final"}) {
    if (!root.contains(key)) continue;
    const json& arr = root.at(key);
    if (!arr.is_array() || int(arr.size()) != ocp.n_x)
      fail(std::string(key) + " must be an array of length " + std::to_string(ocp.n_x));
    auto& slot = key[2] == 'i' ? ocp.x0_value : ocp.xf_value;
    for (int i = 0; i < ocp.n_x; ++i) {
      if (arr[i].is_null()) continue;
      if (!arr[i].is_number()) fail(std::string(key) + " entries must be numbers or null");
      slot[size_t(i)] = arr[i].get<double>();
    }
  }

  const std::vector<Expr> bnd = compile_rows(root, "boundary", end_vars);
  const int n_expr_rows = int(bnd.size());
  int n_pin_rows = 0;
  for (const auto& v : ocp.x0_value) n_pin_rows += v.has_value();
  for (const auto& v : ocp.xf_value) n_pin_rows += v.has_value();
  ocp.n_b = n_expr_rows + n_pin_rows;

  if ((root.contains("boundary_lower") || root.contains("boundary_upper")) && bnd.empty())
    fail("boundary bounds given without \"boundary\" rows");
  const Vec bl = bound_array(root, "boundary_lower", n_expr_rows, 0.0, -kInf);
  const Vec bu = bound_array(root, "boundary_upper", n_expr_rows, 0.0, kInf);
  if (ocp.n_b > 0) {
    ocp.boundary_lower = Vec::Zero(ocp.n_b);
    ocp.boundary_upper = Vec::Zero(ocp.n_b);
    ocp.boundary_lower.head(n_expr_rows) = bl;
    ocp.boundary_upper.head(n_expr_rows) = bu;

    const auto x0_pins = ocp.x0_value;
    const auto xf_pins = ocp.xf_value;
    ocp.boundary = [bnd, end_values, x0_pins, xf_pins, n = ocp.n_b](const Vec& x0, double t0,
                                                                    const Vec& xf, double tf) {
      const auto v = end_values(x0, t0, xf, tf);
      Vec b(n);
      Eigen::Index r = 0;
      for (const Expr& ex : bnd) b[r++] = ex.eval(v.data());
      for (size_t i = 0; i < x0_pins.size(); ++i)
        if (x0_pins[i]) b[r++] = x0[Eigen::Index(i)] - *x0_pins[i];
      for (size_t i = 0; i < xf_pins.size(); ++i)
        if (xf_pins[i]) b[r++] = xf[Eigen::Index(i)] - *xf_pins[i];
      return b;
    };
  }

  ocp.x_lower = bound_array(root, "x_lower", ocp.n_x, -kInf, -kInf);
  ocp.x_upper = bound_array(root, "x_upper", ocp.n_x, kInf, kInf);
  ocp.u_lower = bound_array(root, "u_lower", ocp.n_u, -kInf, -kInf);
  ocp.u_upper = bound_array(root, "u_upper", ocp.n_u, kInf, kInf);

  if (root.contains("t0")) ocp.t0_bounds = time_bound(root.at("t0"), "t0");
  if (!root.contains("tf")) fail("\"tf\" (number or {lower, upper}) is required");
  ocp.tf_bounds = time_bound(root.at("tf"), "tf");

  ocp.finish();
  return ocp;
}
}  // namespace

OcpDefinition load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return problem_from_json_text(buf.str());
}

}  // namespace rocs
