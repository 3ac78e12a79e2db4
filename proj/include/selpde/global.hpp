#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "selpde/problem.hpp"
#include "selpde/quadrature.hpp"
#include "selpde/truncated.hpp"

namespace selpde {

// Radial barrier built from the envelope phi: the closed two-piece form
//   w(r) = (N-2)^{-1} [ int_r^inf xi phi dxi + r^{2-N} int_0^r xi^{N-1} phi dxi ]
// and the nested form
//   w(r) = int_r^inf xi^{1-N} int_0^xi sigma^{N-1} phi dsigma dxi,
// two independently computed routes to the same function, plus the bound
//   K = (N-2)^{-1} int_0^inf xi phi dxi, with w(0) = K for the closed form.
class RadialBarrier {
 public:
  RadialBarrier(std::function<double(double)> phi, int N,
                const QuadOptions& quad = QuadOptions{});
  RadialBarrier(const Problem& p, const EnvelopeOptions& env = {},
                const QuadOptions& quad = QuadOptions{});

  int dim() const { return N_; }
  double K() const { return K_; }
  double phi(double r) const { return phi_(r); }
  double w(double r) const;         // closed form
  double w_nested(double r) const;  // nested-quadrature oracle
  double tail(double r) const;      // int_r^inf xi phi dxi

 private:
  std::function<double(double)> phi_;
  int N_;
  QuadOptions quad_;
  double K_ = 0.0;
  std::shared_ptr<CumulativeIntegral> inner_;  // int_0^r xi^{N-1} phi dxi
};

struct ContinuationTrace {
  std::vector<double> epsilons;   // solved, in schedule order
  std::vector<double> supdiffs;   // between consecutive continuation steps
  std::vector<SolveReport> reports;
  bool cauchy = false;   // two consecutive supdiffs below tol_cauchy
  bool stalled = false;  // three straight non-decreasing supdiffs, each > eps
};

struct GlobalOptions {
  double tol_cauchy = 1e-6;
  double tol_exhaust = 1e-5;
  double r0 = 2.0;
  int balls = 5;  // radii r0 * 2^k, k = 0 .. balls-1
  double nodes_per_unit = 64.0;
  double epsilon_start = 0.5;
  // The schedule halves epsilon down to this floor.  One decade below
  // tol_cauchy by default: supdiffs scale like epsilon, so the Cauchy rule
  // needs schedule room past the tolerance itself.
  double epsilon_floor = 1e-7;
  BracketMode mode = BracketMode::eigen;
  TruncatedSolveOptions solve;
  double barrier_slack_factor = 4.0;  // O(h^2) slack multiplier for u <= w
  bool extrapolate = true;            // whole-space estimate past the last ball
  bool warm_start = true;

  std::vector<double> epsilon_schedule() const;
};

// Warm-started chain of truncated solves over a decreasing epsilon schedule.
std::pair<DiscreteField, ContinuationTrace> epsilon_continuation(
    const Problem& p, const GridPtr& grid, const std::vector<double>& schedule,
    const GlobalOptions& opts, const DiscreteField* start = nullptr);

struct BallRecord {
  double R = 0.0;
  GridPtr grid;
  DiscreteField u;  // continuation limit, zero boundary
  ContinuationTrace continuation;
  double sigma1 = 0.0, m2 = 0.0, M1 = 0.0;
  double barrier_margin = 0.0;  // min over nodes of w(r) - u(r)
  double bracket_slack = 0.0;   // min over nodes of min(u - sub, super - u)
};

// Raised when a ball solution exceeds the barrier beyond the O(h^2) slack;
// a bug signal, mapped to its own exit code by the CLI.
struct BarrierViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalSolution {
  std::vector<BallRecord> balls;
  std::vector<double> trace_supdiff;  // per k >= 1, on the fixed compact B_r0
  bool cauchy = false;                // last supdiff below tol_exhaust
  bool trace_decreasing = false;      // strictly decreasing supdiffs
  DiscreteField limit_field;          // last ball's continuation limit
  DiscreteField final_field;          // whole-space estimate (see extrapolate_limit)
  bool extrapolated = false;
  double extrapolation_mu = 0.0;      // fitted source-decay exponent, 0 if unused
  std::shared_ptr<RadialBarrier> barrier;
};

GlobalSolution exhaust(const Problem& p, const GlobalOptions& opts = {});

// Whole-space estimate from a ball solution: Picard iteration of the radial
// Green representation u = G[a - c u^{-1} |grad u|^2], with the source
// extended past r_cut by a fitted power law.  Removes the zero-Dirichlet
// truncation bias that contaminates log-log decay fits at any finite R.
DiscreteField extrapolate_limit(const Problem& p, const DiscreteField& u_ball,
                                double cut_fraction = 0.7, int iterations = 6,
                                double* mu_fitted = nullptr);

struct DecayFit {
  bool ok = false;
  std::string refusal;  // nonempty when the fit is refused
  double slope = 0.0, intercept = 0.0, rms = 0.0;
  double predicted_slope = 0.0;  // 2 - mu
  std::size_t points = 0;
  double window_lo = 0.0, window_hi = 0.0;
};

// Least-squares slope of ln u vs ln r over [r_lo, r_hi].
DecayFit fit_loglog_window(const DiscreteField& u, double r_lo, double r_hi,
                           double floor = 1e-14);

// Default window: the last half-decade below the outermost ball boundary,
// excluding the 10% of radius nearest the boundary.
DecayFit decay_fit(const GlobalSolution& sol, double mu);

// Slope of the barrier itself, sampled on a log grid in its asymptotic
// regime (far beyond the last ball, where w has settled onto its power law).
DecayFit fit_barrier_slope(const RadialBarrier& b, double r_lo = 1e3, double r_hi = 1e4,
                           int samples = 50);

}  // namespace selpde
