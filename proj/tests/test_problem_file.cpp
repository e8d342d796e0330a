#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "rocs/problem_file.hpp"
#include "rocs/problems.hpp"
#include "rocs/transcription.hpp"

using namespace rocs;

TEST_SUITE_BEGIN("problem_file");

namespace {

const char* kHyperLike = R"json({
  "name": "hyper_like",
  "states": 1,
  "controls": 1,
  "dynamics": ["-x0^3 + u0"],
  "lagrange": "0.5*(x0^2 + u0^2)",
  "t0": 0.0,
  "tf": 10000.0,
  "x_initial": [1.5],
  "x_final": [1.0]
})json";

}  // namespace

TEST_CASE("file problem reproduces the code-defined benchmark NLP") {
  const OcpDefinition file_ocp = problem_from_json_text(kHyperLike);
  const OcpDefinition code_ocp = hyper_sensitive();

  CHECK(file_ocp.n_x == code_ocp.n_x);
  CHECK(file_ocp.n_u == code_ocp.n_u);
  CHECK(file_ocp.n_b == code_ocp.n_b);
  CHECK(file_ocp.t0_bounds.fixed());
  CHECK(file_ocp.tf_bounds.fixed());
  CHECK(file_ocp.tf_bounds.lower == 10000.0);
  REQUIRE(file_ocp.x0_value[0].has_value());
  CHECK(*file_ocp.x0_value[0] == 1.5);

  const Mesh mesh = initial_mesh(4, 3);
  const Transcription ta = assemble(file_ocp, mesh);
  const Transcription tb = assemble(code_ocp, mesh);
  REQUIRE(ta.nlp.n == tb.nlp.n);
  REQUIRE(ta.nlp.m == tb.nlp.m);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec z(ta.nlp.n);
    for (int i = 0; i < z.size(); ++i) z[i] = u(rng);
    CHECK(ta.nlp.objective(z) == doctest::Approx(tb.nlp.objective(z)).epsilon(1e-13));
    const Vec ca = ta.nlp.constraints(z);
    const Vec cb = tb.nlp.constraints(z);
    REQUIRE(ca.size() == cb.size());
    CHECK((ca - cb).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("load_problem_file round-trips through disk") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "rocs_problem_roundtrip.json";
  {
    std::ofstream out(path);
    out << kHyperLike;
  }
  const OcpDefinition ocp = load_problem_file(path.string());
  CHECK(ocp.name == "hyper_like");
  CHECK(ocp.n_x == 1);
  fs::remove(path);
  CHECK_THROWS_AS(load_problem_file(path.string()), std::invalid_argument);
}

TEST_CASE("mayer, boundary rows, and endpoint variables") {
  const char* text = R"({
    "states": 2,
    "controls": 1,
    "dynamics": ["x1", "u0"],
    "mayer": "tf - t0 + xf1^2",
    "boundary": ["xi0 + xi1", "xf0 - 2*xf1"],
    "boundary_lower": [0.0, -1.0],
    "boundary_upper": [0.0, 1.0],
    "tf": {"lower": 1.0, "upper": 20.0}
  })";
  const OcpDefinition ocp = problem_from_json_text(text);
  CHECK(ocp.n_b == 2);
  CHECK(ocp.boundary_lower[1] == -1.0);
  CHECK(ocp.boundary_upper[1] == 1.0);
  CHECK(!ocp.tf_bounds.fixed());

  Vec x0(2), xf(2);
  x0 << 0.3, -0.2;
  xf << 1.0, 0.25;
  CHECK(ocp.mayer(x0, 2.0, xf, 9.0) == doctest::Approx(9.0 - 2.0 + 0.25 * 0.25));
  const Vec b = ocp.boundary(x0, 2.0, xf, 9.0);
  CHECK(b[0] == doctest::Approx(0.1));
  CHECK(b[1] == doctest::Approx(0.5));
}

TEST_CASE("pins append equality rows after explicit boundary rows") {
  const char* text = R"({
    "states": 2,
    "controls": 0,
    "dynamics": ["x1", "-x0"],
    "boundary": ["xf0 - xi0"],
    "tf": 1.0,
    "x_initial": [1.0, null],
    "x_final": [null, 0.5]
  })";
  const OcpDefinition ocp = problem_from_json_text(text);
  CHECK(ocp.n_b == 3);
  CHECK(!ocp.x0_value[1].has_value());
  REQUIRE(ocp.xf_value[1].has_value());
  Vec x0(2), xf(2);
  x0 << 4.0, 7.0;
  xf << 6.0, 9.0;
  const Vec b = ocp.boundary(x0, 0.0, xf, 1.0);
  REQUIRE(b.size() == 3);
  CHECK(b[0] == doctest::Approx(2.0));   // xf0 - xi0
  CHECK(b[1] == doctest::Approx(3.0));   // x0[0] - 1.0
  CHECK(b[2] == doctest::Approx(8.5));   // xf[1] - 0.5
  CHECK(ocp.boundary_lower.size() == 3);
  CHECK(ocp.boundary_lower[2] == 0.0);
  CHECK(ocp.boundary_upper[2] == 0.0);
}

TEST_CASE("path rows and box bounds with nulls") {
  const char* text = R"({
    "states": 1,
    "controls": 2,
    "dynamics": ["u0 + u1"],
    "path": ["x0^2 + u0^2"],
    "path_lower": [null],
    "path_upper": [4.0],
    "x_lower": [-1.0],
    "x_upper": [null],
    "u_lower": [-1.0, null],
    "u_upper": [1.0, 2.0],
    "tf": 5.0
  })";
  const OcpDefinition ocp = problem_from_json_text(text);
  CHECK(ocp.n_c == 1);
  CHECK(std::isinf(ocp.path_lower[0]));
  CHECK(ocp.path_upper[0] == 4.0);
  CHECK(ocp.x_lower[0] == -1.0);
  CHECK(std::isinf(ocp.x_upper[0]));
  CHECK(std::isinf(ocp.u_lower[1]));
  CHECK(ocp.u_upper[1] == 2.0);
  Vec x(1), u(2);
  x << 1.5;
  u << 0.5, 0.0;
  CHECK(ocp.path(x, u, 0.0)[0] == doctest::Approx(2.5));
}

TEST_CASE("malformed problems are rejected with invalid_argument") {
  // Missing dynamics.
  CHECK_THROWS_AS(problem_from_json_text(R"({"states": 1, "tf": 1.0})"), std::invalid_argument);
  // Wrong dynamics arity.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 2, "dynamics": ["x1"], "tf": 1.0})"),
                  std::invalid_argument);
  // Unknown key (typo).
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamcs": ["0"], "tf": 1.0})"),
                  std::invalid_argument);
  // Unknown variable in an expression.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamics": ["x1"], "tf": 1.0})"),
                  std::invalid_argument);
  // Missing tf.
  CHECK_THROWS_AS(problem_from_json_text(R"({"states": 1, "dynamics": ["-x0"]})"),
                  std::invalid_argument);
  // tf bounds inverted.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamics": ["-x0"], "tf": {"lower": 2.0, "upper": 1.0}})"),
                  std::invalid_argument);
  // Bound array length mismatch.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamics": ["-x0"], "x_lower": [0, 0], "tf": 1.0})"),
                  std::invalid_argument);
  // Path bounds without path rows.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamics": ["-x0"], "path_upper": [1.0], "tf": 1.0})"),
                  std::invalid_argument);
  // Boundary expression referencing running variables.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": 1, "dynamics": ["-x0"], "boundary": ["u0"], "tf": 1.0})"),
                  std::invalid_argument);
  // Not JSON at all.
  CHECK_THROWS_AS(problem_from_json_text("not json"), std::invalid_argument);
  // Wrong type for states.
  CHECK_THROWS_AS(problem_from_json_text(
                      R"({"states": "one", "dynamics": ["-x0"], "tf": 1.0})"),
                  std::invalid_argument);
}

TEST_CASE("defaults: free problem with only dynamics and tf") {
  const OcpDefinition ocp = problem_from_json_text(
      R"({"states": 1, "controls": 1, "dynamics": ["u0"], "lagrange": "u0^2", "tf": 2.0})");
  CHECK(ocp.name == "file_problem");
  CHECK(ocp.n_b == 0);
  CHECK(ocp.n_c == 0);
  CHECK(ocp.t0_bounds.fixed());
  CHECK(ocp.t0_bounds.lower == 0.0);
  CHECK(std::isinf(ocp.x_lower[0]));
  // finish() fills the zero mayer.
  Vec x0(1), xf(1);
  x0 << 1.0;
  xf << 2.0;
  CHECK(ocp.mayer(x0, 0.0, xf, 2.0) == 0.0);
}

TEST_SUITE_END();
