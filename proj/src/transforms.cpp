#include "selpde/transforms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "selpde/operators.hpp"

namespace selpde {

TransformSpec TransformSpec::exponential() {
  TransformSpec s;
  s.kind = Kind::exponential;
  return s;
}

TransformSpec TransformSpec::power(double delta) {
  if (!(delta > 1.0)) throw std::invalid_argument("power transform needs delta > 1");
  TransformSpec s;
  s.kind = Kind::power;
  s.delta = delta;
  return s;
}

double TransformSpec::C() const {
  if (kind == Kind::exponential) return 1.0;
  return 1.0 / (delta - 1.0);
}

double TransformSpec::c_star() const {
  return kind == Kind::exponential ? 1.0 : delta * C();
}

std::string TransformSpec::name() const {
  return kind == Kind::exponential ? "exponential" : "power";
}

DiscreteField forward_map(const TransformSpec& spec, const DiscreteField& u) {
  DiscreteField w(u.grid, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (spec.kind == TransformSpec::Kind::exponential) {
      w[i] = std::exp(-u[i]);
    } else {
      if (!(u[i] > 0.0))
        throw std::domain_error("power forward_map needs u > 0 at every node");
      w[i] = spec.C() * std::pow(u[i], -1.0 / spec.C());
    }
  }
  return w;
}

DiscreteField inverse_map(const TransformSpec& spec, const DiscreteField& w) {
  DiscreteField u(w.grid, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::domain_error("inverse_map needs w > 0 at every node");
    if (spec.kind == TransformSpec::Kind::exponential)
      u[i] = -std::log(w[i]);
    else
      u[i] = std::pow(w[i] / spec.C(), -spec.C());
  }
  return u;
}

TransformResidualReport verify_transform_residual(
    const TransformSpec& spec, const CoefficientField& a, const DiscreteField& w,
    double window_fraction, std::vector<std::pair<double, double>>* rows) {
  const Grid& g = *w.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  DiscreteField u(w.grid, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) {
      u[i] = spec.kind == TransformSpec::Kind::exponential
                 ? -std::log(w[i])
                 : std::pow(w[i] / spec.C(), -spec.C());
    } else {
      u[i] = nan;  // blow-up node; excluded with its stencil neighborhood
    }
  }

  // Distance of a node to the domain boundary, in units of the domain's
  // characteristic half-extent.
  auto boundary_distance = [&](std::size_t i) -> std::pair<double, double> {
    switch (g.kind) {
      case GridKind::radial:
        return {g.radius() - g.xs[i], g.radius()};
      case GridKind::rect1d: {
        const double lo = g.xs[i] - g.xs.front(), hi = g.xs.back() - g.xs[i];
        return {std::min(lo, hi), 0.5 * (g.xs.back() - g.xs.front())};
      }
      case GridKind::rect2d: {
        const std::size_t ix = i % g.nx(), iy = i / g.nx();
        const double dx = std::min(g.xs[ix] - g.xs.front(), g.xs.back() - g.xs[ix]);
        const double dy = std::min(g.ys[iy] - g.ys.front(), g.ys.back() - g.ys[iy]);
        const double half =
            0.5 * std::min(g.xs.back() - g.xs.front(), g.ys.back() - g.ys.front());
        return {std::min(dx, dy), half};
      }
    }
    throw std::logic_error("unknown grid kind");
  };

  LinearOperator L = negative_laplacian(w.grid);
  DiscreteField Au = apply(L, u);  // NaN propagates out of excluded stencils

  TransformResidualReport rep;
  rep.window_fraction = window_fraction;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (g.boundary_node(i)) continue;
    auto [dist, half] = boundary_distance(i);
    if (dist < window_fraction * half) continue;
    const double lap_u = -Au[i];
    if (!std::isfinite(lap_u) || !std::isfinite(u[i])) continue;
    const double h_of_u = spec.kind == TransformSpec::Kind::exponential
                              ? std::exp(u[i])
                              : std::pow(u[i], spec.delta);
    double av;
    if (g.kind == GridKind::radial) {
      av = eval_field(a, EvalPoint::radius(g.xs[i]));
    } else {
      double x[2] = {0.0, 0.0};
      const int dim = g.kind == GridKind::rect1d ? 1 : 2;
      if (dim == 1) {
        x[0] = g.xs[i];
      } else {
        x[0] = g.xs[i % g.nx()];
        x[1] = g.ys[i / g.nx()];
      }
      const double r = dim == 1 ? std::fabs(x[0]) : std::hypot(x[0], x[1]);
      av = eval_field(a, EvalPoint{r, x, dim});
    }
    const double res = std::fabs(lap_u - av * h_of_u);
    rep.max_residual = std::max(rep.max_residual, res);
    ++rep.window_nodes;
    if (rows) rows->emplace_back(g.kind == GridKind::radial ? g.xs[i] : dist, res);
  }
  if (rep.window_nodes == 0) throw std::runtime_error("transform residual: empty window");
  return rep;
}

}  // namespace selpde
