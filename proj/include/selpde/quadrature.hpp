#pragma once

#include <functional>
#include <map>

namespace selpde {

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // conservative estimate of the remaining error
  int intervals = 0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

// Adaptive 15-point Gauss-Kronrod on [a, b]; open rule, endpoints are never
// evaluated.
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt = {});

// Improper integral over [a, inf) through the substitution t = 1/(1+x),
// which maps the tail onto (0, 1/(1+a)].
QuadResult integrate_to_infinity(const Integrand& f, double a, const QuadOptions& opt = {});

// Improper integral over [a, inf) by window doubling: integrate [a, a+L],
// then keep doubling L until two consecutive increments fall below
// rel_tol * (|total| + scale_hint).
QuadResult integrate_tail_doubling(const Integrand& f, double a, double initial_window,
                                   double scale_hint, const QuadOptions& opt = {});

// Checkpointed cumulative integral C(x) = int_{origin}^{x} f.  Queries reuse
// the nearest lower checkpoint, so clustered evaluation patterns cost a few
// quadrature panels each.
class CumulativeIntegral {
 public:
  CumulativeIntegral(Integrand f, double origin, QuadOptions opt = {});
  double operator()(double x) const;

 private:
  Integrand f_;
  double origin_;
  QuadOptions opt_;
  mutable std::map<double, double> checkpoints_;  // x -> C(x)
};

}  // namespace selpde
