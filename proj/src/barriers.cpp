#include "selpde/barriers.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "selpde/eigenpair.hpp"
#include "selpde/operators.hpp"
#include "selpde/truncated.hpp"

namespace selpde {

BracketMode parse_bracket_mode(const std::string& name) {
  if (name == "eigen") return BracketMode::eigen;
  if (name == "poisson") return BracketMode::poisson;
  if (name == "combined") return BracketMode::combined;
  throw std::invalid_argument("unknown bracket mode '" + name + "'");
}

std::string bracket_mode_name(BracketMode m) {
  switch (m) {
    case BracketMode::eigen:
      return "eigen";
    case BracketMode::poisson:
      return "poisson";
    case BracketMode::combined:
      return "combined";
  }
  return "?";
}

DiscreteField poisson_supersolution(const Problem& p, const GridPtr& grid) {
  if (!p.domain.bounded() && grid->kind != GridKind::radial)
    throw std::invalid_argument("poisson supersolution needs a bounded grid");
  LinearOperator L = negative_laplacian(grid);
  DiscreteField a = eval_on_grid(p.a, grid);
  return solve_linear(L, a, 0.0);
}

double compute_sigma1(double m2, double lambda1, double max_phi1_sq, double M1,
                      double max_grad_phi1_sq) {
  if (!(m2 > 0) || !(lambda1 > 0) || !(max_phi1_sq > 0) || M1 < 0 ||
      !(max_grad_phi1_sq > 0))
    throw std::invalid_argument("compute_sigma1: inputs must be positive");
  return std::min(m2 / (2.0 * lambda1 * max_phi1_sq + 4.0 * M1 * max_grad_phi1_sq), 1.0);
}

double compute_sigma1_alt(double m2, const DiscreteField& v, double M1) {
  if (!(m2 > 0) || M1 < 0)
    throw std::invalid_argument("compute_sigma1_alt: inputs must be positive");
  DiscreteField gsq = discrete_gradient_sq(v);
  double denom = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    denom = std::max(denom, 2.0 * v[i] + 4.0 * M1 * gsq[i]);
  if (!(denom > 0)) throw std::invalid_argument("compute_sigma1_alt: degenerate v");
  return std::min(m2 / denom, 1.0);
}

BracketPair build_bracket(const Problem& p, const GridPtr& grid, double epsilon,
                          BracketMode mode) {
  if (!(epsilon > 0)) throw std::invalid_argument("build_bracket: epsilon must be > 0");
  BracketPair b;
  b.mode = mode;
  b.epsilon = epsilon;

  DiscreteField a = eval_on_grid(p.a, grid);
  DiscreteField c = eval_on_grid(p.c, grid);
  // Inter-node extrema can undercut nodal ones; deflate/inflate to stay safe.
  b.m2 = 0.99 * a.min_value();
  b.M1 = 1.01 * c.max_value();
  if (!(b.m2 > 0)) throw std::runtime_error("build_bracket: min a <= 0 (AC2 violated)");
  // c may vanish identically (pure Poisson limit); it must not go negative.
  if (b.M1 < 0 || c.min_value() < 0)
    throw std::runtime_error("build_bracket: c < 0 somewhere (AC2 violated)");

  b.super_base = poisson_supersolution(p, grid);

  auto eigen_sub = [&]() {
    LinearOperator L = negative_laplacian(grid);
    EigenResult eig = first_eigenpair(L);
    ExtremaStats st = extrema_stats(eig.phi1);
    const double s1 = compute_sigma1(b.m2, eig.lambda1, st.max_phi_sq, b.M1,
                                     st.max_grad_phi_sq);
    DiscreteField sub(grid, 0.0);
    for (std::size_t i = 0; i < sub.size(); ++i)
      sub[i] = s1 * eig.phi1[i] * eig.phi1[i];
    return std::pair<double, DiscreteField>(s1, std::move(sub));
  };
  auto poisson_sub = [&]() {
    const double s1 = compute_sigma1_alt(b.m2, b.super_base, b.M1);
    DiscreteField sub(grid, 0.0);
    for (std::size_t i = 0; i < sub.size(); ++i)
      sub[i] = s1 * b.super_base[i] * b.super_base[i];
    return std::pair<double, DiscreteField>(s1, std::move(sub));
  };

  switch (mode) {
    case BracketMode::eigen: {
      auto [s1, sub] = eigen_sub();
      b.sigma1 = s1;
      b.sub_base = std::move(sub);
      break;
    }
    case BracketMode::poisson: {
      auto [s1, sub] = poisson_sub();
      b.sigma1 = s1;
      b.sub_base = std::move(sub);
      break;
    }
    case BracketMode::combined: {
      // Nodal max of the two subsolutions: a valid lower bound for u_eps
      // because each one is (not itself claimed to be a subsolution).
      auto [se, sube] = eigen_sub();
      auto [sp, subp] = poisson_sub();
      b.sigma1 = se;
      b.sigma1_alt = sp;
      b.sub_base = std::move(sube);
      for (std::size_t i = 0; i < b.sub_base.size(); ++i)
        b.sub_base[i] = std::max(b.sub_base[i], subp[i]);
      break;
    }
  }

  for (std::size_t i = 0; i < b.sub_base.size(); ++i) {
    if (b.sub_base[i] <= b.super_base[i] + 1e-14) continue;
    std::ostringstream msg;
    msg << "bracket ordering violated at node " << i << ": sub=" << b.sub_base[i]
        << " > super=" << b.super_base[i] << " (discretization too coarse?)";
    throw std::runtime_error(msg.str());
  }
  return b;
}

SubsolutionReport verify_subsolution_residual(const Problem& p, const BracketPair& b) {
  SubsolutionReport rep;
  const Grid& g = *b.sub_base.grid;
  DiscreteField rs = residual_field(p, b.sub_base, b.epsilon);
  DiscreteField rv = residual_field(p, b.super_base, b.epsilon);
  bool first = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.boundary_node(i)) continue;
    if (first) {
      rep.max_sub_residual = rs[i];
      rep.min_super_residual = rv[i];
      first = false;
    } else {
      rep.max_sub_residual = std::max(rep.max_sub_residual, rs[i]);
      rep.min_super_residual = std::min(rep.min_super_residual, rv[i]);
    }
  }
  return rep;
}

}  // namespace selpde
