#include "selpde/global.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "selpde/operators.hpp"

namespace selpde {

RadialBarrier::RadialBarrier(std::function<double(double)> phi, int N, const QuadOptions& quad)
    : phi_(std::move(phi)), N_(N), quad_(quad) {
  if (N_ <= 2) throw std::invalid_argument("barrier needs N > 2");
  QuadResult a3 = integrate_to_infinity([this](double x) { return x * phi_(x); }, 0.0, quad_);
  if (!a3.converged)
    throw std::runtime_error("barrier: integral of r*phi did not converge (A3 violated?)");
  K_ = a3.value / (N_ - 2);
  inner_ = std::make_shared<CumulativeIntegral>(
      [this](double x) { return std::pow(x, N_ - 1) * phi_(x); }, 0.0, quad_);
}

RadialBarrier::RadialBarrier(const Problem& p, const EnvelopeOptions& env,
                             const QuadOptions& quad)
    : RadialBarrier([p, env](double r) { return phi_envelope(p, r, env); }, p.dim, quad) {}

double RadialBarrier::tail(double r) const {
  QuadResult t = integrate_to_infinity([this](double x) { return x * phi_(x); }, r, quad_);
  if (!t.converged) throw std::runtime_error("barrier: tail quadrature failed");
  return t.value;
}

double RadialBarrier::w(double r) const {
  if (r < 0) throw std::invalid_argument("barrier: r must be >= 0");
  if (r == 0.0) return K_;  // the r^{2-N} piece vanishes at r = 0
  const double piece1 = tail(r);
  const double piece2 = std::pow(r, 2.0 - N_) * (*inner_)(r);
  return (piece1 + piece2) / (N_ - 2);
}

double RadialBarrier::w_nested(double r) const {
  if (r < 0) throw std::invalid_argument("barrier: r must be >= 0");
  QuadResult out = integrate_to_infinity(
      [this](double xi) { return std::pow(xi, 1.0 - N_) * (*inner_)(xi); },
      r, quad_);
  if (!out.converged) throw std::runtime_error("barrier: nested quadrature failed");
  return out.value;
}

std::vector<double> GlobalOptions::epsilon_schedule() const {
  std::vector<double> s;
  for (double e = epsilon_start; e >= epsilon_floor && s.size() < 64; e *= 0.5)
    s.push_back(e);
  if (s.empty()) s.push_back(epsilon_floor);
  return s;
}

std::pair<DiscreteField, ContinuationTrace> epsilon_continuation(
    const Problem& p, const GridPtr& grid, const std::vector<double>& schedule,
    const GlobalOptions& opts, const DiscreteField* start) {
  if (schedule.empty()) throw std::invalid_argument("continuation: empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i - 1]))
      throw std::invalid_argument("continuation: schedule must strictly decrease");

  // The bracket bases are epsilon-free; only the shift changes per step.
  BracketPair bracket = build_bracket(p, grid, schedule.front(), opts.mode);

  ContinuationTrace trace;
  DiscreteField u;
  bool have_u = false;
  if (start) {
    u = *start;
    have_u = true;
  }
  int non_decreasing = 0;
  for (double eps : schedule) {
    bracket.epsilon = eps;
    std::pair<DiscreteField, SolveReport> step =
        have_u ? solve_truncated_from(p, grid, eps, bracket, u, opts.solve)
               : solve_truncated(p, grid, eps, bracket, opts.solve);
    if (!step.second.converged) {
      trace.stalled = true;
      trace.reports.push_back(std::move(step.second));
      break;
    }
    if (have_u) {
      const double d = sup_distance(step.first, u);
      if (!trace.supdiffs.empty() && d >= trace.supdiffs.back()) {
        // While eps still dominates the solution scale the diffs grow
        // legitimately; only moves larger than eps itself count as a stall.
        if (d > eps && ++non_decreasing >= 3) {
          trace.stalled = true;
        }
      } else {
        non_decreasing = 0;
      }
      trace.supdiffs.push_back(d);
    }
    u = std::move(step.first);
    have_u = true;
    trace.epsilons.push_back(eps);
    trace.reports.push_back(std::move(step.second));

    const std::size_t m = trace.supdiffs.size();
    if (m >= 2 && trace.supdiffs[m - 1] < opts.tol_cauchy &&
        trace.supdiffs[m - 2] < opts.tol_cauchy) {
      trace.cauchy = true;
      break;
    }
    if (trace.stalled) break;
  }
  if (!have_u) throw std::runtime_error("continuation: no solve succeeded");
  return {std::move(u), std::move(trace)};
}

namespace {

struct LogFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
  std::size_t points = 0;
};

LogFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LogFit f;
  f.points = xs.size();
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    rss += e * e;
  }
  f.rms = std::sqrt(rss / n);
  return f;
}

}  // namespace

DiscreteField extrapolate_limit(const Problem& p, const DiscreteField& u_ball,
                                double cut_fraction, int iterations, double* mu_fitted) {
  const Grid& g = *u_ball.grid;
  if (g.kind != GridKind::radial) throw std::invalid_argument("extrapolation is radial-only");
  const int N = g.dim;
  if (N <= 2) throw std::invalid_argument("extrapolation needs N > 2");
  const std::size_t n = g.size();
  const double R = g.radius();
  const double r_cut = cut_fraction * R;

  DiscreteField a = eval_on_grid(p.a, u_ball.grid);
  DiscreteField c = eval_on_grid(p.c, u_ball.grid);

  DiscreteField u = u_ball;
  double mu_tilde = 0.0;
  for (int it = 0; it < iterations; ++it) {
    // Effective source a~ = a - c |grad u|^2 / u on trusted nodes (r <= r_cut).
    DiscreteField gsq = discrete_gradient_sq(u);
    std::vector<double> atil(n, 0.0);
    std::size_t ic = 0;  // last trusted node
    for (std::size_t i = 0; i < n; ++i) {
      if (g.xs[i] <= r_cut) ic = i;
      const double ui = std::max(u[i], 1e-300);
      atil[i] = a[i] - c[i] * gsq[i] / ui;
    }
    if (ic + 1 < 8) throw std::runtime_error("extrapolation: too few trusted nodes");

    // Power-law model of the source past r_cut, fitted on [r_cut/2, r_cut].
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i <= ic; ++i) {
      if (g.xs[i] < 0.5 * r_cut || g.xs[i] <= 0.0) continue;
      if (!(atil[i] > 0.0)) continue;
      lx.push_back(std::log(g.xs[i]));
      ly.push_back(std::log(atil[i]));
    }
    if (lx.size() < 8) throw std::runtime_error("extrapolation: source tail not positive");
    LogFit fit = fit_line(lx, ly);
    mu_tilde = -fit.slope;
    const double amp = std::exp(fit.intercept);
    if (!(mu_tilde > 2.05))
      throw std::runtime_error("extrapolation: fitted source decay too slow (mu <= 2)");

    // Green representation with the fitted tail:
    //   T1(r) = int_r^inf xi a~ dxi,  T2(r) = int_0^r xi^{N-1} a~ dxi,
    //   u(r) = (T1 + r^{2-N} T2) / (N-2).
    const double rc = g.xs[ic];
    const double tail1_rc = amp * std::pow(rc, 2.0 - mu_tilde) / (mu_tilde - 2.0);
    std::vector<double> T1(n, 0.0), T2(n, 0.0);
    for (std::size_t i = 1; i <= ic; ++i) {
      const double h = g.xs[i] - g.xs[i - 1];
      T2[i] = T2[i - 1] + 0.5 * h *
                              (std::pow(g.xs[i - 1], N - 1) * atil[i - 1] +
                               std::pow(g.xs[i], N - 1) * atil[i]);
    }
    T1[ic] = tail1_rc;
    for (std::size_t i = ic; i-- > 0;) {
      const double h = g.xs[i + 1] - g.xs[i];
      T1[i] = T1[i + 1] + 0.5 * h * (g.xs[i] * atil[i] + g.xs[i + 1] * atil[i + 1]);
    }
    for (std::size_t i = ic + 1; i < n; ++i) {
      const double r = g.xs[i];
      T1[i] = amp * std::pow(r, 2.0 - mu_tilde) / (mu_tilde - 2.0);
      T2[i] = T2[ic] + amp * (std::pow(r, static_cast<double>(N) - mu_tilde) -
                              std::pow(rc, static_cast<double>(N) - mu_tilde)) /
                           (static_cast<double>(N) - mu_tilde);
    }
    DiscreteField next(u_ball.grid, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = g.xs[i];
      const double piece2 = (i == 0) ? 0.0 : std::pow(r, 2.0 - N) * T2[i];
      next[i] = (T1[i] + piece2) / (N - 2);
    }
    u = std::move(next);
  }
  if (mu_fitted) *mu_fitted = mu_tilde;
  return u;
}

GlobalSolution exhaust(const Problem& p, const GlobalOptions& opts) {
  p.validate();
  if (p.domain.kind != DomainKind::wholespace)
    throw std::invalid_argument("exhaust: whole-space problems only");
  if (!p.a.radial())
    throw std::invalid_argument("exhaust: the solver runs radially; a must be radial");

  GlobalSolution sol;
  sol.barrier = std::make_shared<RadialBarrier>(p);

  const std::vector<double> schedule = opts.epsilon_schedule();
  DiscreteField warm;
  bool have_warm = false;

  for (int k = 0; k < opts.balls; ++k) {
    const double R = opts.r0 * std::pow(2.0, k);
    const std::size_t nodes = static_cast<std::size_t>(std::lround(R * opts.nodes_per_unit)) + 1;
    GridPtr grid = make_radial_grid(R, nodes, p.dim);

    Problem ball = p;
    ball.domain.kind = DomainKind::ball;
    ball.domain.radius = R;

    DiscreteField start;
    const DiscreteField* start_ptr = nullptr;
    if (have_warm && opts.warm_start) {
      start = interpolate_linear(warm, grid);  // extends the last value (0) outward
      start_ptr = &start;
    }
    auto [u, trace] = epsilon_continuation(ball, grid, schedule, opts, start_ptr);

    BallRecord rec;
    rec.R = R;
    rec.grid = grid;
    rec.continuation = std::move(trace);

    // Limit bracket sigma1 phi1^2 <= u <= v, epsilon-free after continuation.
    BracketPair bracket = build_bracket(ball, grid, schedule.front(), opts.mode);
    rec.sigma1 = bracket.sigma1;
    rec.m2 = bracket.m2;
    rec.M1 = bracket.M1;
    double slack = HUGE_VAL;
    for (std::size_t i = 0; i < u.size(); ++i)
      slack = std::min(slack, std::min(u[i] - bracket.sub_base[i],
                                       bracket.super_base[i] - u[i]));
    rec.bracket_slack = slack;

    // Barrier comparison u_k <= w with O(h^2) slack.
    const double h = grid->spacing();
    const double barrier_slack = opts.barrier_slack_factor * h * h * (1.0 + u.inf_norm());
    double margin = HUGE_VAL;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = sol.barrier->w(grid->xs[i]) - u[i];
      if (m < margin) {
        margin = m;
        worst = i;
      }
    }
    rec.barrier_margin = margin;
    if (margin < -barrier_slack) {
      std::ostringstream msg;
      msg << "barrier violated on ball R=" << R << " at r=" << grid->xs[worst]
          << ": u=" << u[worst] << " > w=" << sol.barrier->w(grid->xs[worst])
          << " beyond slack " << barrier_slack;
      throw BarrierViolation(msg.str());
    }

    // Convergence trace on the fixed compact B_r0 (grids share the spacing).
    if (!sol.balls.empty()) {
      const DiscreteField& prev = sol.balls.back().u;
      const Grid& gp = *prev.grid;
      double d = 0.0;
      std::size_t shared = 0;
      while (shared < gp.size() && gp.xs[shared] <= opts.r0 + 1e-12) ++shared;
      for (std::size_t i = 0; i < shared; ++i) {
        if (std::fabs(gp.xs[i] - grid->xs[i]) > 1e-12)
          throw std::logic_error("exhaustion grids do not nest");
        d = std::max(d, std::fabs(prev[i] - u[i]));
      }
      sol.trace_supdiff.push_back(d);
    }

    rec.u = std::move(u);
    warm = rec.u;
    have_warm = true;
    sol.balls.push_back(std::move(rec));

    if (!sol.trace_supdiff.empty() && sol.trace_supdiff.back() < opts.tol_exhaust) {
      sol.cauchy = true;
      break;
    }
  }

  sol.trace_decreasing = sol.trace_supdiff.size() >= 1;
  for (std::size_t i = 1; i < sol.trace_supdiff.size(); ++i)
    if (!(sol.trace_supdiff[i] < sol.trace_supdiff[i - 1])) sol.trace_decreasing = false;

  sol.limit_field = sol.balls.back().u;
  sol.final_field = sol.limit_field;
  if (opts.extrapolate) {
    // Best-effort de-biasing; on small domains the source fit window can be
    // too narrow to certify a power law, and the raw field stands.
    try {
      double mu = 0.0;
      sol.final_field = extrapolate_limit(p, sol.limit_field, 0.7, 6, &mu);
      sol.extrapolated = true;
      sol.extrapolation_mu = mu;
    } catch (const std::exception&) {
      sol.final_field = sol.limit_field;
    }
  }
  return sol;
}

DecayFit fit_loglog_window(const DiscreteField& u, double r_lo, double r_hi, double floor) {
  const Grid& g = *u.grid;
  DecayFit out;
  out.window_lo = r_lo;
  out.window_hi = r_hi;
  if (g.kind != GridKind::radial) {
    out.refusal = "decay fit needs a radial field";
    return out;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.xs[i];
    if (r < r_lo || r > r_hi || r <= 0.0) continue;
    if (u[i] < floor) {
      out.refusal = "field below floor inside the fit window";
      return out;
    }
    lx.push_back(std::log(r));
    ly.push_back(std::log(u[i]));
  }
  if (lx.size() < 8) {
    out.refusal = "fit window underpopulated";
    return out;
  }
  LogFit f = fit_line(lx, ly);
  out.ok = true;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.rms = f.rms;
  out.points = f.points;
  return out;
}

DecayFit decay_fit(const GlobalSolution& sol, double mu) {
  const double R = sol.balls.back().R;
  const double hi = 0.9 * R;             // exclude the outer 10% of radius
  const double lo = hi / std::sqrt(10.0);  // half a decade
  DecayFit f = fit_loglog_window(sol.final_field, lo, hi);
  f.predicted_slope = 2.0 - mu;
  return f;
}

DecayFit fit_barrier_slope(const RadialBarrier& b, double r_lo, double r_hi, int samples) {
  std::vector<double> lx(samples), ly(samples);
  for (int i = 0; i < samples; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (samples - 1));
    const double wv = b.w(r);
    if (!(wv > 0.0)) {
      DecayFit out;
      out.refusal = "barrier nonpositive in the sampling window";
      return out;
    }
    lx[i] = std::log(r);
    ly[i] = std::log(wv);
  }
  LogFit f = fit_line(lx, ly);
  DecayFit out;
  out.ok = true;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.rms = f.rms;
  out.points = f.points;
  out.window_lo = r_lo;
  out.window_hi = r_hi;
  return out;
}

}  // namespace selpde
