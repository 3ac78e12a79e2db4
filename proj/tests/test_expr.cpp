#include <cmath>
#include <random>

#include "doctest.h"
#include "selpde/expr.hpp"

using namespace selpde;

TEST_CASE("literals, constants, and arithmetic") {
  CHECK(Expr::parse("2 + 3*4").eval_radius(0.0) == 14.0);
  CHECK(Expr::parse("(2 + 3)*4").eval_radius(0.0) == 20.0);
  CHECK(Expr::parse("7/2").eval_radius(0.0) == 3.5);
  CHECK(Expr::parse("pi").eval_radius(0.0) == doctest::Approx(3.14159265358979).epsilon(1e-14));
  CHECK(Expr::parse("e").eval_radius(0.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(Expr::parse("1e-3").eval_radius(0.0) == 1e-3);
  CHECK(Expr::parse("2.5e2").eval_radius(0.0) == 250.0);
}

TEST_CASE("power is right-associative and unary minus binds tighter than a base") {
  CHECK(Expr::parse("2^3^2").eval_radius(0.0) == 512.0);
  CHECK(Expr::parse("-2^2").eval_radius(0.0) == 4.0);
  CHECK(Expr::parse("-(2^2)").eval_radius(0.0) == -4.0);
  CHECK(Expr::parse("2^-1").eval_radius(0.0) == 0.5);
  CHECK(Expr::parse("(1+r)^(-4)").eval_radius(1.0) == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("radius and coordinate symbols") {
  Expr f = Expr::parse("r^2");
  CHECK(f.radial());
  CHECK(f.max_coordinate() == 0);
  CHECK(f.eval_radius(3.0) == 9.0);

  Expr g = Expr::parse("x1 + 2*x2");
  CHECK_FALSE(g.radial());
  CHECK(g.max_coordinate() == 2);
  double x[2] = {0.5, 0.25};
  CHECK(g.eval(EvalPoint{std::hypot(0.5, 0.25), x, 2}) == 1.0);
}

TEST_CASE("function whitelist") {
  CHECK(Expr::parse("exp(0)").eval_radius(0.0) == 1.0);
  CHECK(Expr::parse("ln(e)").eval_radius(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Expr::parse("sin(pi/2)").eval_radius(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Expr::parse("cos(0)").eval_radius(0.0) == 1.0);
  CHECK(Expr::parse("sqrt(16)").eval_radius(0.0) == 4.0);
  CHECK(Expr::parse("abs(-3)").eval_radius(0.0) == 3.0);
  CHECK(Expr::parse("min(1, exp(-r))").eval_radius(2.0) ==
        doctest::Approx(0.13533528323661270232).epsilon(1e-15));
  CHECK(Expr::parse("max(2, r)").eval_radius(5.0) == 5.0);
  CHECK(Expr::parse("pow(2, 10)").eval_radius(0.0) == 1024.0);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(Expr::parse("2 +"), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(2)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("2 * * 3"), ParseError);
  CHECK_THROWS_AS(Expr::parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(Expr::parse(""), ParseError);
  try {
    Expr::parse("1 + @");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("to_string round trip evaluates identically at random points") {
  const char* sources[] = {
      "(1 + r^2)^(-2)",
      "0.1 + 1/(1 + r^2)",
      "6 + 4*r^2",
      "exp(-r)*sin(r) - cos(r/2)",
      "min(1, max(r - 1, 1/(1+r)))",
      "2 + x1/(1 + r^2)",
      "pow(1 + r, -4) + abs(x2 - x1)",
  };
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  for (const char* src : sources) {
    Expr f = Expr::parse(src);
    Expr g = Expr::parse(f.to_string());
    for (int k = 0; k < 100; ++k) {
      double x[2] = {unif(rng), unif(rng)};
      EvalPoint pt{std::hypot(x[0], x[1]), x, 2};
      CHECK(f.eval(pt) == g.eval(pt));
    }
  }
}
