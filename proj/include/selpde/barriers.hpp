#pragma once

#include <string>

#include "selpde/problem.hpp"

namespace selpde {

enum class BracketMode { eigen, poisson, combined };
BracketMode parse_bracket_mode(const std::string& name);
std::string bracket_mode_name(BracketMode m);

// Ordered sub/super pair for the truncated problem in its zero-boundary
// form: sub_base <= u <= super_base, with the epsilon shift applied on
// demand.  Storing the bases keeps the two boundary conventions (0 vs
// epsilon) consistent by construction.
struct BracketPair {
  DiscreteField sub_base;    // sigma1 * phi1^2 (eigen) or sigma1 * v^2 (poisson)
  DiscreteField super_base;  // v, the Poisson supersolution
  double sigma1 = 0.0;
  double sigma1_alt = 0.0;   // the poisson-mode constant, set in combined mode
  double epsilon = 0.0;
  double m2 = 0.0;           // deflated min of a over nodes
  double M1 = 0.0;           // inflated max of c over nodes
  BracketMode mode = BracketMode::eigen;

  DiscreteField sub() const { return sub_base + epsilon; }
  DiscreteField super() const { return super_base + epsilon; }
};

// v = solve(-Delta v = a, v = 0 on the boundary); positive inside by the
// discrete maximum principle.
DiscreteField poisson_supersolution(const Problem& p, const GridPtr& grid);

// sigma1 <= min{ m2 / (2 lambda1 max phi1^2 + 4 M1 max |grad phi1|^2), 1 }
double compute_sigma1(double m2, double lambda1, double max_phi1_sq, double M1,
                      double max_grad_phi1_sq);

// Alternative constant: sigma1 <= min{ m2 / max(2v + 4 M1 |grad v|^2), 1 }
double compute_sigma1_alt(double m2, const DiscreteField& v, double M1);

// Builds the bracket and verifies sub <= super nodally; a violated ordering
// throws (coarse-discretization signal) instead of clamping.
BracketPair build_bracket(const Problem& p, const GridPtr& grid, double epsilon,
                          BracketMode mode);

struct SubsolutionReport {
  double max_sub_residual = 0.0;   // max over interior of F(sub_base); want <= O(h^2)
  double min_super_residual = 0.0; // min over interior of F(super_base); want >= -O(h^2)
};
SubsolutionReport verify_subsolution_residual(const Problem& p, const BracketPair& b);

}  // namespace selpde
