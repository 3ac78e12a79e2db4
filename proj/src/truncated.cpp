#include "selpde/truncated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "selpde/operators.hpp"

namespace selpde {
namespace {

// Everything the residual/Jacobian needs, evaluated once per solve.
struct NodalProblem {
  GridPtr grid;
  LinearOperator L;
  DiscreteField a, c;
  std::vector<std::vector<DerivStencil>> stencils;

  NodalProblem(const Problem& p, const GridPtr& g)
      : grid(g),
        L(negative_laplacian(g)),
        a(eval_on_grid(p.a, g)),
        c(eval_on_grid(p.c, g)) {
    stencils.resize(g->size());
    for (std::size_t i = 0; i < g->size(); ++i)
      if (!g->boundary_node(i)) stencils[i] = gradient_stencils(*g, i);
  }

  // Directional derivatives at node i for the current iterate.
  void derivs(const DiscreteField& u, std::size_t i, double* d) const {
    const auto& st = stencils[i];
    for (std::size_t k = 0; k < st.size(); ++k) {
      double s = 0.0;
      for (int m = 0; m < 3; ++m) s += st[k].w[m] * u[st[k].base + m * st[k].stride];
      d[k] = s;
    }
  }

  DiscreteField residual(const DiscreteField& u, double eps) const {
    DiscreteField Au = apply(L, u);
    DiscreteField F(grid, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (grid->boundary_node(i)) {
        F[i] = u[i];
        continue;
      }
      const double denom = u[i] + eps;
      if (!(denom > 0.0)) {
        std::ostringstream msg;
        msg << "residual: u+eps = " << denom << " is nonpositive at node " << i;
        throw std::runtime_error(msg.str());
      }
      double gsq = 0.0;
      double d[2];
      derivs(u, i, d);
      for (std::size_t k = 0; k < stencils[i].size(); ++k) gsq += d[k] * d[k];
      F[i] = Au[i] + c[i] * gsq / denom - a[i];
    }
    return F;
  }

  // J = A + diag(-c g/(u+eps)^2) + first-order terms 2 c d_k w / (u+eps).
  LinearOperator jacobian(const DiscreteField& u, double eps) const {
    LinearOperator J;
    J.grid = grid;
    J.dirichlet = L.dirichlet;
    J.symmetric_hint = false;
    J.ptr.assign(1, 0);
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t i = 0; i < u.size(); ++i) {
      row.clear();
      if (grid->boundary_node(i)) {
        row.emplace_back(i, 1.0);
      } else {
        for (std::size_t k = L.ptr[i]; k < L.ptr[i + 1]; ++k)
          row.emplace_back(L.col[k], L.val[k]);
        const double denom = u[i] + eps;
        double d[2];
        derivs(u, i, d);
        double gsq = 0.0;
        for (std::size_t k = 0; k < stencils[i].size(); ++k) gsq += d[k] * d[k];
        row.emplace_back(i, -c[i] * gsq / (denom * denom));
        for (std::size_t k = 0; k < stencils[i].size(); ++k) {
          const DerivStencil& st = stencils[i][k];
          for (int m = 0; m < 3; ++m) {
            if (st.w[m] == 0.0) continue;  // origin stencil is all zeros
            row.emplace_back(st.base + m * st.stride, 2.0 * c[i] * d[k] * st.w[m] / denom);
          }
        }
        std::sort(row.begin(), row.end());
        std::size_t w = 0;
        for (std::size_t r = 0; r < row.size(); ++r) {
          if (w > 0 && row[w - 1].first == row[r].first)
            row[w - 1].second += row[r].second;
          else
            row[w++] = row[r];
        }
        row.resize(w);
      }
      for (const auto& [col, val] : row) {
        J.col.push_back(col);
        J.val.push_back(val);
      }
      J.ptr.push_back(J.col.size());
    }
    return J;
  }
};

double norm2(const DiscreteField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s);
}

double interior_inf(const DiscreteField& f) {
  const Grid& g = *f.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!g.boundary_node(i)) m = std::max(m, std::fabs(f[i]));
  return m;
}

}  // namespace

DiscreteField residual_field(const Problem& p, const DiscreteField& u, double epsilon) {
  NodalProblem np(p, u.grid);
  return np.residual(u, epsilon);
}

LinearOperator residual_jacobian(const Problem& p, const DiscreteField& u, double epsilon) {
  NodalProblem np(p, u.grid);
  return np.jacobian(u, epsilon);
}

std::pair<DiscreteField, SolveReport> solve_truncated_from(const Problem& p,
                                                           const GridPtr& grid, double epsilon,
                                                           const BracketPair& bracket,
                                                           const DiscreteField& start,
                                                           const TruncatedSolveOptions& opts) {
  if (epsilon < 0) throw std::invalid_argument("epsilon must be >= 0");
  if (bracket.sub_base.grid != grid || bracket.super_base.grid != grid)
    throw std::invalid_argument("bracket does not live on the solve grid");
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (bracket.sub_base[i] > bracket.super_base[i] + 1e-14)
      throw std::invalid_argument("invalid bracket: sub > super");
    if (epsilon == 0.0 && !grid->boundary_node(i) && !(bracket.sub_base[i] > 0.0))
      throw std::invalid_argument(
          "epsilon = 0 needs a strictly positive interior lower bracket");
  }

  NodalProblem np(p, grid);
  SolveReport rep;

  const double noise_floor = 8.0 * std::numeric_limits<double>::epsilon() * np.L.inf_norm();
  auto tolerance = [&](const DiscreteField& u) {
    return opts.tol_residual * (np.a.inf_norm() + 1.0) + noise_floor * (u.inf_norm() + 1.0);
  };

  DiscreteField u = start;
  if (opts.bracket_projection) project_to_bracket(u, bracket.sub_base, bracket.super_base);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (grid->boundary_node(i)) u[i] = 0.0;

  DiscreteField F = np.residual(u, epsilon);
  double f2 = norm2(F);
  rep.residual_history.push_back(interior_inf(F));

  auto finished = [&]() { return interior_inf(F) <= tolerance(u); };

  // Damped Newton phase.
  for (int it = 0; it < opts.max_newton && !finished(); ++it) {
    LinearOperator J = np.jacobian(u, epsilon);
    DiscreteField negF = -1.0 * F;
    DiscreteField delta = solve_linear(J, negF, 0.0);

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= opts.damping_factor) {
      DiscreteField trial = u + t * delta;
      std::size_t repairs = 0;
      if (opts.bracket_projection)
        repairs = project_to_bracket(trial, bracket.sub_base, bracket.super_base);
      DiscreteField Ftrial;
      try {
        Ftrial = np.residual(trial, epsilon);
      } catch (const std::runtime_error&) {
        continue;  // stepped outside the positivity region; shrink
      }
      const double f2trial = norm2(Ftrial);
      if (f2trial < f2) {
        u = std::move(trial);
        F = std::move(Ftrial);
        f2 = f2trial;
        ++rep.iterations;
        rep.residual_history.push_back(interior_inf(F));
        rep.repairs_history.push_back(repairs);
        rep.bracket_violations_repaired += repairs;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // Newton stalled
  }

  // Picard fallback: -Delta u_next = a - c |grad u|^2/(u+eps).
  if (!finished() && opts.picard_fallback) {
    rep.used_picard = true;
    for (int it = 0; it < opts.max_picard && !finished(); ++it) {
      DiscreteField rhs(grid, 0.0);
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (grid->boundary_node(i)) continue;
        double d[2];
        np.derivs(u, i, d);
        double gsq = 0.0;
        for (std::size_t k = 0; k < np.stencils[i].size(); ++k) gsq += d[k] * d[k];
        rhs[i] = np.a[i] - np.c[i] * gsq / (u[i] + epsilon);
      }
      DiscreteField next = solve_linear(np.L, rhs, 0.0);
      std::size_t repairs = 0;
      if (opts.bracket_projection)
        repairs = project_to_bracket(next, bracket.sub_base, bracket.super_base);
      const double change = sup_distance(next, u);
      u = std::move(next);
      F = np.residual(u, epsilon);
      f2 = norm2(F);
      ++rep.iterations;
      rep.residual_history.push_back(interior_inf(F));
      rep.repairs_history.push_back(repairs);
      rep.bracket_violations_repaired += repairs;
      if (change == 0.0) break;  // fixed point reached exactly
    }
  }

  rep.final_residual = interior_inf(F);
  rep.tolerance_used = tolerance(u);
  rep.converged = rep.final_residual <= rep.tolerance_used;
  return {std::move(u), std::move(rep)};
}

std::pair<DiscreteField, SolveReport> solve_truncated(const Problem& p, const GridPtr& grid,
                                                      double epsilon,
                                                      const BracketPair& bracket,
                                                      const TruncatedSolveOptions& opts) {
  DiscreteField mid(grid, 0.0);
  for (std::size_t i = 0; i < mid.size(); ++i)
    mid[i] = 0.5 * (bracket.sub_base[i] + bracket.super_base[i]);
  return solve_truncated_from(p, grid, epsilon, bracket, mid, opts);
}

UniquenessReport verify_uniqueness(const Problem& p, const GridPtr& grid, double epsilon,
                                   const BracketPair& bracket,
                                   const std::vector<DiscreteField>& starts,
                                   const TruncatedSolveOptions& opts) {
  if (starts.empty()) throw std::invalid_argument("verify_uniqueness: needs >= 1 start");
  UniquenessReport rep;
  rep.all_converged = true;
  std::vector<DiscreteField> sols;
  for (const DiscreteField& s : starts) {
    auto [u, r] = solve_truncated_from(p, grid, epsilon, bracket, s, opts);
    rep.all_converged = rep.all_converged && r.converged;
    rep.runs.push_back(std::move(r));
    sols.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      rep.max_pairwise_distance =
          std::max(rep.max_pairwise_distance, sup_distance(sols[i], sols[j]));
      for (std::size_t k = 0; k < sols[i].size(); ++k) {
        if (grid->boundary_node(k)) continue;
        const double alpha = (sols[i][k] + epsilon) / (sols[j][k] + epsilon) - 1.0;
        rep.max_alpha = std::max(rep.max_alpha, std::fabs(alpha));
      }
    }
  }
  return rep;
}

}  // namespace selpde
