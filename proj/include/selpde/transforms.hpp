#pragma once

#include <string>
#include <utility>
#include <vector>

#include "selpde/problem.hpp"

namespace selpde {

// Changes of variable linking the boundary blow-up problem
// Delta u = a(x) h(u) to the singular gradient problem:
//   exponential: h(u) = e^u,    w = e^{-u},        induced c* = 1
//   power:       h(u) = u^delta (delta > 1), C = 1/(delta-1),
//                w = C u^{-1/C},               induced c* = delta C
struct TransformSpec {
  enum class Kind { exponential, power } kind = Kind::exponential;
  double delta = 2.0;  // power kind only

  static TransformSpec exponential();
  static TransformSpec power(double delta);

  double C() const;       // 1/(delta-1); meaningful for power kind
  double c_star() const;  // induced constant gradient coefficient
  std::string name() const;
};

// w from u.  Power kind requires u > 0 nodally.
DiscreteField forward_map(const TransformSpec& spec, const DiscreteField& u);

// u from w: exponential u = -ln w; power u = (w/C)^{-C}.  Requires w > 0.
DiscreteField inverse_map(const TransformSpec& spec, const DiscreteField& w);

struct TransformResidualReport {
  double max_residual = 0.0;   // max |Delta_h u - a h(u)| over the window
  std::size_t window_nodes = 0;
  double window_fraction = 0.0;
};

// Blow-up equation residual Delta_h u - a h(u) with u = inverse_map(w),
// evaluated on an interior window that excludes nodes within
// window_fraction of the radius of the boundary (u blows up there).
// With rows non-null, appends (boundary distance proxy, residual) per node.
TransformResidualReport verify_transform_residual(
    const TransformSpec& spec, const CoefficientField& a, const DiscreteField& w,
    double window_fraction = 0.05,
    std::vector<std::pair<double, double>>* rows = nullptr);

}  // namespace selpde
