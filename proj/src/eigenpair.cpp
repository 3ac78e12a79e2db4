#include "selpde/eigenpair.hpp"

#include <cmath>
#include <stdexcept>

namespace selpde {
namespace {

double flat_dot(const DiscreteField& a, const DiscreteField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

EigenResult first_eigenpair(const LinearOperator& op, double tol, int max_iter) {
  const std::size_t n = op.size();
  EigenResult res;
  res.phi1 = DiscreteField(op.grid, 0.0);
  for (std::size_t i = 0; i < n; ++i) res.phi1[i] = op.dirichlet[i] ? 0.0 : 1.0;

  double lambda_prev = 0.0;
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    DiscreteField w = solve_linear(op, res.phi1, 0.0);
    // w ~ phi / lambda, so <phi, w>/<w, w> estimates lambda from below
    const double lambda = flat_dot(res.phi1, w) / flat_dot(w, w);

    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(w[i]) > std::fabs(peak)) peak = w[i];
    if (peak == 0.0) throw std::runtime_error("inverse iteration collapsed to zero");
    for (std::size_t i = 0; i < n; ++i) w[i] /= peak;
    res.phi1 = std::move(w);

    if (res.iterations > 1 &&
        std::fabs(lambda - lambda_prev) < tol * std::max(1.0, std::fabs(lambda))) {
      lambda_prev = lambda;
      break;
    }
    lambda_prev = lambda;
  }

  // Final Rayleigh quotient in the flat inner product.
  DiscreteField Aphi = apply(op, res.phi1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (op.dirichlet[i]) continue;
    num += res.phi1[i] * Aphi[i];
    den += res.phi1[i] * res.phi1[i];
  }
  res.lambda1 = num / den;

  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (op.dirichlet[i]) continue;
    r = std::max(r, std::fabs(Aphi[i] - res.lambda1 * res.phi1[i]));
    if (!(res.phi1[i] > 0.0))
      throw std::runtime_error("eigenfunction not strictly positive at an interior node");
  }
  res.residual = r;
  if (!(res.lambda1 > 0.0)) throw std::runtime_error("first eigenvalue not positive");
  return res;
}

ExtremaStats extrema_stats(const DiscreteField& phi1) {
  ExtremaStats s;
  DiscreteField gsq = discrete_gradient_sq(phi1);
  for (std::size_t i = 0; i < phi1.size(); ++i) {
    const double p2 = phi1[i] * phi1[i];
    if (p2 > s.max_phi_sq) {
      s.max_phi_sq = p2;
      s.argmax_phi = i;
    }
    if (gsq[i] > s.max_grad_phi_sq) {
      s.max_grad_phi_sq = gsq[i];
      s.argmax_grad = i;
    }
  }
  return s;
}

}  // namespace selpde
