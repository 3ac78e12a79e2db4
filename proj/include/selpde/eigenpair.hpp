#pragma once

#include "selpde/operators.hpp"

namespace selpde {

struct EigenResult {
  double lambda1 = 0.0;
  DiscreteField phi1;      // sign-fixed positive, normalized so max phi1 = 1
  double residual = 0.0;   // inf norm of (-Delta_h phi1 - lambda1 phi1) on free rows
  int iterations = 0;
};

// Plain inverse power iteration (shift 0): the operator is positive definite
// and lambda1 is its smallest eigenvalue.  Stops when successive Rayleigh
// estimates differ by less than tol (relative).
EigenResult first_eigenpair(const LinearOperator& op, double tol = 1e-13, int max_iter = 500);

struct ExtremaStats {
  double max_phi_sq = 0.0;
  double max_grad_phi_sq = 0.0;
  std::size_t argmax_phi = 0;
  std::size_t argmax_grad = 0;
};
ExtremaStats extrema_stats(const DiscreteField& phi1);

}  // namespace selpde
