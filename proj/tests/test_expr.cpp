#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "rocs/expr.hpp"

using namespace rocs;

TEST_SUITE_BEGIN("expr");

namespace {
double eval1(const std::string& text, double x) {
  const Expr e = Expr::parse(text, {"x"});
  return e.eval(&x);
}
}  // namespace

TEST_CASE("literals, precedence, and associativity") {
  const std::vector<std::string> none;
  CHECK(Expr::parse("2+3*4", none).eval(nullptr) == 14.0);
  CHECK(Expr::parse("(2+3)*4", none).eval(nullptr) == 20.0);
  CHECK(Expr::parse("2*3^2", none).eval(nullptr) == 18.0);
  CHECK(Expr::parse("-3^2", none).eval(nullptr) == -9.0);
  CHECK(Expr::parse("2^3^2", none).eval(nullptr) == 512.0);
  CHECK(Expr::parse("2^-3", none).eval(nullptr) == 0.125);
  CHECK(Expr::parse("10-4-3", none).eval(nullptr) == 3.0);
  CHECK(Expr::parse("16/4/2", none).eval(nullptr) == 2.0);
  CHECK(Expr::parse("--5", none).eval(nullptr) == 5.0);
  CHECK(Expr::parse("+7", none).eval(nullptr) == 7.0);
  CHECK(Expr::parse("1.5e2 + .25", none).eval(nullptr) == 150.25);
}

TEST_CASE("constants and shadowing") {
  const std::vector<std::string> none;
  CHECK(Expr::parse("pi", none).eval(nullptr) == doctest::Approx(3.14159265358979).epsilon(1e-14));
  CHECK(Expr::parse("e", none).eval(nullptr) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  // A variable named like a constant wins.
  const double v = 42.0;
  CHECK(Expr::parse("pi", {"pi"}).eval(&v) == 42.0);
}

TEST_CASE("functions match the C library on random inputs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = u(rng);
    CHECK(eval1("sin(x)", x) == std::sin(x));
    CHECK(eval1("cos(x)", x) == std::cos(x));
    CHECK(eval1("tan(x)", x) == std::tan(x));
    CHECK(eval1("asin(x)", x) == std::asin(x));
    CHECK(eval1("acos(x)", x) == std::acos(x));
    CHECK(eval1("atan(x)", x) == std::atan(x));
    CHECK(eval1("sinh(x)", x) == std::sinh(x));
    CHECK(eval1("cosh(x)", x) == std::cosh(x));
    CHECK(eval1("tanh(x)", x) == std::tanh(x));
    CHECK(eval1("exp(x)", x) == std::exp(x));
    CHECK(eval1("sqrt(x+1)", x) == std::sqrt(x + 1.0));
    CHECK(eval1("log(x+2)", x) == std::log(x + 2.0));
    CHECK(eval1("log10(x+2)", x) == std::log10(x + 2.0));
    CHECK(eval1("abs(x)", x) == std::abs(x));
    CHECK(eval1("atan2(x, 2)", x) == std::atan2(x, 2.0));
    CHECK(eval1("pow(x+2, 1.5)", x) == std::pow(x + 2.0, 1.5));
    CHECK(eval1("min(x, 0.25)", x) == std::min(x, 0.25));
    CHECK(eval1("max(x, 0.25)", x) == std::max(x, 0.25));
  }
  CHECK(eval1("sign(x)", 3.5) == 1.0);
  CHECK(eval1("sign(x)", -0.2) == -1.0);
  CHECK(eval1("sign(x)", 0.0) == 0.0);
}

TEST_CASE("multi-variable expressions agree with compiled equivalents") {
  const std::vector<std::string> vars = {"x0", "x1", "u0", "tau"};
  const Expr a = Expr::parse("-x0^3 + u0", vars);
  const Expr b = Expr::parse("0.5*(x0^2 + u0^2)", vars);
  const Expr c = Expr::parse("x1*cos(tau) - u0/(x0^2 + 1)", vars);
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double v[4] = {u(rng), u(rng), u(rng), u(rng)};
    // ^ calls pow at run time while the compiler folds pow(x, 2.0) to x*x,
    // so the reference can differ in the last ulp.
    CHECK(a.eval(v) == doctest::Approx(-std::pow(v[0], 3.0) + v[2]).epsilon(1e-15));
    CHECK(b.eval(v) ==
          doctest::Approx(0.5 * (std::pow(v[0], 2.0) + std::pow(v[2], 2.0))).epsilon(1e-15));
    CHECK(c.eval(v) == doctest::Approx(v[1] * std::cos(v[3]) - v[2] / (v[0] * v[0] + 1.0))
                           .epsilon(1e-15));
  }
}

TEST_CASE("trig identity holds to machine precision") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const Expr e = Expr::parse("sin(x)^2 + cos(x)^2", {"x"});
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    CHECK(e.eval(&x) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("ieee semantics instead of exceptions at domain edges") {
  CHECK(std::isinf(eval1("1/x", 0.0)));
  CHECK(std::isnan(eval1("sqrt(x)", -1.0)));
  CHECK(std::isnan(eval1("log(x)", -1.0)));
}

TEST_CASE("malformed input throws with position info") {
  const std::vector<std::string> vars = {"x"};
  CHECK_THROWS_AS(Expr::parse("", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("2 +", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("2 2", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("(2", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("sin()", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("sin(1, 2)", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("atan2(1)", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("bogus(1)", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("y + 1", vars), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("x @ 2", vars), std::invalid_argument);
  try {
    Expr::parse("2 + %", vars);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("position 4") != std::string::npos);
  }
}

TEST_CASE("deep nesting spills to the heap safely") {
  // Right-nested sums keep 41 operands pending, past the fixed 32-slot
  // evaluation buffer.
  std::string text = "x";
  for (int i = 0; i < 40; ++i) text = "(1 + " + text + ")";
  const double x = 2.0;
  CHECK(Expr::parse(text, {"x"}).eval(&x) == 42.0);
}

TEST_SUITE_END();
