#pragma once

#include <utility>
#include <vector>

#include "selpde/barriers.hpp"
#include "selpde/operators.hpp"
#include "selpde/problem.hpp"

namespace selpde {

struct TruncatedSolveOptions {
  double tol_residual = 1e-10;  // relative to (max|a| + 1); a rounding floor
                                // scaled by |A|_inf is always added
  int max_newton = 50;
  double damping_factor = 0.5;
  int max_halvings = 30;
  bool picard_fallback = true;
  int max_picard = 400;
  bool bracket_projection = true;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;  // accepted steps (Newton + Picard)
  std::vector<double> residual_history;       // inf norm after each accepted step
  std::vector<std::size_t> repairs_history;   // nodes projected per accepted step
  std::size_t bracket_violations_repaired = 0;
  double final_residual = 0.0;
  double tolerance_used = 0.0;
  bool used_picard = false;
};

// Residual of the zero-boundary truncated form:
//   F(u) = -Delta_h u + c (u+eps)^{-1} |grad u|^2_h - a   at interior nodes,
//   F(u) = u                                              at boundary nodes.
// The solution of the eps-boundary form is exactly this u plus eps.
DiscreteField residual_field(const Problem& p, const DiscreteField& u, double epsilon);

// Analytic Jacobian of residual_field at u (boundary rows are identity).
LinearOperator residual_jacobian(const Problem& p, const DiscreteField& u, double epsilon);

// Damped Newton with the analytic Jacobian; every accepted iterate is
// projected onto [sub_base, super_base]; Picard fallback when Newton stalls.
// epsilon = 0 is admitted only when the bracket's interior lower bound is
// strictly positive.
std::pair<DiscreteField, SolveReport> solve_truncated_from(const Problem& p,
                                                           const GridPtr& grid, double epsilon,
                                                           const BracketPair& bracket,
                                                           const DiscreteField& start,
                                                           const TruncatedSolveOptions& opts = {});

// Default start: bracket midpoint.
std::pair<DiscreteField, SolveReport> solve_truncated(const Problem& p, const GridPtr& grid,
                                                      double epsilon,
                                                      const BracketPair& bracket,
                                                      const TruncatedSolveOptions& opts = {});

struct UniquenessReport {
  bool all_converged = false;
  double max_pairwise_distance = 0.0;
  double max_alpha = 0.0;  // max over pairs/nodes of |(u+eps)/(v+eps) - 1|
  std::vector<SolveReport> runs;
  bool conclusive() const { return all_converged; }
};

UniquenessReport verify_uniqueness(const Problem& p, const GridPtr& grid, double epsilon,
                                   const BracketPair& bracket,
                                   const std::vector<DiscreteField>& starts,
                                   const TruncatedSolveOptions& opts = {});

}  // namespace selpde
