#pragma once

#include <memory>
#include <string>
#include <vector>

#include "selpde/expr.hpp"
#include "selpde/grid.hpp"

namespace selpde {

// Tabulated radial profile with monotone cubic (Fritsch-Butland) slopes so
// monotone data interpolates monotonically.  Outside the knot range the end
// values extend as constants.
struct TableProfile {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> slopes;

  static TableProfile load(const std::string& path);
  static TableProfile from_data(std::vector<double> knots, std::vector<double> values);
  double eval(double r) const;
};

// A coefficient is either a parsed expression or a tabulated radial profile.
struct CoefficientField {
  Expr expr;
  std::shared_ptr<const TableProfile> table;

  static CoefficientField from_expression(const std::string& text);
  static CoefficientField from_table(TableProfile t);

  bool empty() const { return expr.empty() && !table; }
  bool radial() const;
  double eval(const EvalPoint& p) const;
  double eval_radius(double r) const;
  std::string describe() const;
};

// Throws when the field evaluates non-finite, naming the location.
double eval_field(const CoefficientField& f, const EvalPoint& p);

enum class DomainKind { ball, rect, wholespace };

struct DomainSpec {
  DomainKind kind = DomainKind::ball;
  double radius = 1.0;              // ball
  std::vector<double> lo, hi;       // rect, one pair per dimension
  bool bounded() const { return kind != DomainKind::wholespace; }
  std::string describe() const;
};

struct Problem {
  int dim = 3;
  CoefficientField a;
  CoefficientField c;
  DomainSpec domain;

  void validate() const;  // throws on violated structural invariants
};

// Line-oriented "key = value" problem files; '#' starts a comment.
// keys: dim, domain (ball R | rect a..b [c..d] | wholespace),
//       a / c (expressions) or a_table / c_table (paths relative to the file).
Problem parse_problem_text(const std::string& text, const std::string& origin);
Problem parse_problem_file(const std::string& path);

// Nodal evaluation on a grid (radial grids use eval_radius; rectangle grids
// build coordinate points).
DiscreteField eval_on_grid(const CoefficientField& f, const GridPtr& grid);

struct EnvelopeOptions {
  int sphere_samples = 128;
  double safety = 1.05;
};
// phi(r) = max over the sphere |x| = r of a(x); exact for radial a, sampled
// max times the safety factor otherwise (a deliberate over-estimate so the
// barrier built from phi stays an upper bound).
double phi_envelope(const Problem& p, double r, const EnvelopeOptions& opt = {});

struct SamplingSpec {
  std::size_t radial_samples = 512;
  int sphere_samples = 64;
  double r_max = 1e4;          // outer sampling radius in whole-space mode
  double mu_fit_rms_max = 1e-2;
};

struct AssumptionReport {
  bool ac2_pass = false;
  double ac2_worst_value = 0.0;
  std::string ac2_worst_field;   // "a" or "c"
  std::string ac2_worst_where;

  bool a3_checked = false;       // whole-space problems only
  bool a3_finite = false;
  double a3_value = 0.0;

  bool mu_available = false;     // log-log fit residual below threshold
  double mu = 0.0;
  double mu_fit_rms = 0.0;
  bool mu_admissible = false;    // mu in (2, N)

  bool holder_continuity_assumed = true;  // not machine-checkable, recorded

  bool pass(bool wholespace) const {
    return ac2_pass && (!wholespace || (a3_checked && a3_finite));
  }
};

AssumptionReport check_assumptions(const Problem& p, const SamplingSpec& s = {});
std::string render_report(const AssumptionReport& r, const Problem& p);

}  // namespace selpde
