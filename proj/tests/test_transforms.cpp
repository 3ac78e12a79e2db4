#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "doctest.h"
#include "selpde/transforms.hpp"

using namespace selpde;

namespace {

// Blow-up pairs on the unit ball, N = 3, both sharing w = 1 - r^2:
//   exponential: u = -ln(1-r^2) solves  Delta u = a e^u,   a = (6-2r^2)/(1-r^2)
//   power d=2:   u = (1-r^2)^-1 solves  Delta u = a u^2,   a = (6+2r^2)/(1-r^2)
Problem exp_pair() {
  return parse_problem_text(
      "dim = 3\ndomain = ball 1\na = (6 - 2*r^2)/(1 - r^2)\nc = 1\n", "inline");
}

Problem pow_pair() {
  return parse_problem_text(
      "dim = 3\ndomain = ball 1\na = (6 + 2*r^2)/(1 - r^2)\nc = 1\n", "inline");
}

DiscreteField parabola(const GridPtr& g) {
  DiscreteField w(g, 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    double r = g->xs[i];
    w[i] = 1.0 - r * r;
  }
  return w;
}

}  // namespace

TEST_CASE("induced constants: c* = delta/(delta-1), decreasing, exponential gives 1") {
  CHECK(TransformSpec::exponential().c_star() == 1.0);
  CHECK(TransformSpec::power(1.5).c_star() == 3.0);
  CHECK(TransformSpec::power(2.0).c_star() == 2.0);
  CHECK(TransformSpec::power(3.0).c_star() == 1.5);
  CHECK(TransformSpec::power(1.5).C() == 2.0);
  CHECK(TransformSpec::power(3.0).C() == 0.5);

  double prev = HUGE_VAL;
  for (double d : {1.1, 1.5, 2.0, 3.0, 8.0}) {
    double cs = TransformSpec::power(d).c_star();
    CHECK(cs < prev);
    CHECK(cs > 1.0);  // approaches the exponential constant from above
    prev = cs;
  }

  CHECK(TransformSpec::exponential().name() == "exponential");
  CHECK(TransformSpec::power(2.0).name() == "power");
  CHECK_THROWS(TransformSpec::power(1.0));
  CHECK_THROWS(TransformSpec::power(0.5));
}

TEST_CASE("exponential map: pointwise values and order reversal") {
  GridPtr g = make_radial_grid(1.0, 65, 3);
  TransformSpec ex = TransformSpec::exponential();

  DiscreteField zero(g, 0.0);
  DiscreteField w = forward_map(ex, zero);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == 1.0);

  // u = -ln(1 - r^2) maps back onto the parabola
  DiscreteField wp = parabola(g);
  DiscreteField u(g, 0.0);
  for (std::size_t i = 0; i + 1 < g->size(); ++i) u[i] = -std::log(wp[i]);
  u[g->size() - 1] = 50.0;  // stand-in for the blow-up node
  DiscreteField back = forward_map(ex, u);
  for (std::size_t i = 0; i + 1 < g->size(); ++i)
    CHECK(back[i] == doctest::Approx(wp[i]).epsilon(1e-14));

  // larger u means smaller w
  CHECK(forward_map(ex, DiscreteField(g, 3.0))[0] < forward_map(ex, DiscreteField(g, 2.0))[0]);
}

TEST_CASE("power map: frozen point, guards, and order reversal") {
  GridPtr g = make_interval_grid(0.0, 1.0, 9);
  TransformSpec p2 = TransformSpec::power(2.0);

  DiscreteField four(g, 4.0);
  CHECK(forward_map(p2, four)[0] == 0.25);         // C = 1, w = 1/u
  CHECK(inverse_map(p2, forward_map(p2, four))[0] == 4.0);

  DiscreteField nonpos(g, 0.0);
  CHECK_THROWS(forward_map(p2, nonpos));
  CHECK_THROWS(inverse_map(p2, nonpos));
  CHECK_THROWS(inverse_map(TransformSpec::exponential(), nonpos));

  CHECK(forward_map(p2, DiscreteField(g, 9.0))[0] < forward_map(p2, DiscreteField(g, 4.0))[0]);
}

TEST_CASE("round trips are exact to 1e-12 for both kinds") {
  GridPtr g = make_radial_grid(1.0, 129, 3);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(0.1, 10.0);

  DiscreteField u(g, 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) u[i] = pos(rng);

  std::vector<TransformSpec> specs = {TransformSpec::exponential(),
                                      TransformSpec::power(1.5), TransformSpec::power(2.0),
                                      TransformSpec::power(3.0)};
  for (const TransformSpec& s : specs) {
    DiscreteField w = forward_map(s, u);
    DiscreteField back = inverse_map(s, w);
    for (std::size_t i = 0; i < g->size(); ++i)
      CHECK(std::fabs(back[i] - u[i]) <= 1e-12 * std::fabs(u[i]));

    // and the other direction, starting from a positive w
    DiscreteField w0(g, 0.0);
    for (std::size_t i = 0; i < g->size(); ++i) w0[i] = pos(rng);
    DiscreteField u0 = inverse_map(s, w0);
    DiscreteField wback = forward_map(s, u0);
    for (std::size_t i = 0; i < g->size(); ++i)
      CHECK(std::fabs(wback[i] - w0[i]) <= 1e-12 * std::fabs(w0[i]));
  }
}

TEST_CASE("exponential identity: residual is second order, wrong kind explodes") {
  Problem p = exp_pair();
  TransformSpec ex = TransformSpec::exponential();

  double res[2];
  std::size_t ns[2] = {129, 257};
  for (int k = 0; k < 2; ++k) {
    GridPtr g = make_radial_grid(1.0, ns[k], 3);
    // measure away from the rim so both grids share the deepest kept node
    res[k] = verify_transform_residual(ex, p.a, parabola(g), 0.2).max_residual;
  }
  CHECK(res[0] / res[1] > 3.4);
  CHECK(res[0] / res[1] < 4.6);

  GridPtr g = make_radial_grid(1.0, 257, 3);
  double wrong =
      verify_transform_residual(TransformSpec::power(2.0), p.a, parabola(g), 0.2).max_residual;
  CHECK(wrong >= 10.0 * res[1]);
}

TEST_CASE("power identity: residual is second order, wrong delta explodes") {
  Problem p = pow_pair();
  TransformSpec p2 = TransformSpec::power(2.0);

  double res[2];
  std::size_t ns[2] = {129, 257};
  for (int k = 0; k < 2; ++k) {
    GridPtr g = make_radial_grid(1.0, ns[k], 3);
    res[k] = verify_transform_residual(p2, p.a, parabola(g), 0.2).max_residual;
  }
  CHECK(res[0] / res[1] > 3.4);
  CHECK(res[0] / res[1] < 4.6);

  GridPtr g = make_radial_grid(1.0, 257, 3);
  double wrong =
      verify_transform_residual(TransformSpec::power(3.0), p.a, parabola(g), 0.2).max_residual;
  CHECK(wrong >= 10.0 * res[1]);
}

TEST_CASE("a flat w against a zero source has zero residual") {
  Problem p = parse_problem_text("dim = 3\ndomain = ball 1\na = 0\nc = 1\n", "inline");
  GridPtr g = make_radial_grid(1.0, 65, 3);
  DiscreteField w(g, 0.5);
  TransformResidualReport rep =
      verify_transform_residual(TransformSpec::exponential(), p.a, w);
  CHECK(rep.max_residual <= 1e-11);
}

TEST_CASE("residual window: counts, rows, and the empty-window guard") {
  Problem p = exp_pair();
  GridPtr g = make_radial_grid(1.0, 65, 3);
  DiscreteField w = parabola(g);  // w = 0 on the rim: a genuine blow-up node

  std::vector<std::pair<double, double>> rows;
  TransformResidualReport rep =
      verify_transform_residual(TransformSpec::exponential(), p.a, w, 0.05, &rows);

  std::size_t expect = 0;
  for (std::size_t i = 0; i < g->size(); ++i)
    if (!g->boundary_node(i) && (g->radius() - g->xs[i]) >= 0.05 * g->radius()) ++expect;
  CHECK(rep.window_nodes == expect);
  CHECK(rows.size() == rep.window_nodes);
  CHECK(rep.window_fraction == 0.05);
  for (const auto& [r, res] : rows) {
    CHECK(r >= 0.0);
    CHECK(r <= 0.95);
    CHECK(res >= 0.0);
  }

  CHECK_THROWS(verify_transform_residual(TransformSpec::exponential(), p.a, w, 1.5));
}
