#include "selpde/runs.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "selpde/fieldio.hpp"

namespace selpde {
namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> radii;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    if (cur.empty()) continue;
    radii.push_back(std::stod(cur));
  }
  return radii;
}

CsvTable continuation_csv(const ContinuationTrace& t) {
  CsvTable csv;
  csv.columns = {"step", "epsilon", "supdiff", "iterations", "final_residual"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < t.epsilons.size(); ++i) {
    csv.rows.push_back({static_cast<double>(i), t.epsilons[i],
                        i == 0 ? nan : t.supdiffs[i - 1],
                        static_cast<double>(t.reports[i].iterations),
                        t.reports[i].final_residual});
  }
  return csv;
}

GlobalOptions global_options_from(const RunOptions& opt) {
  GlobalOptions g;
  g.tol_cauchy = opt.tol_cauchy;
  g.tol_exhaust = opt.tol_exhaust;
  g.epsilon_start = opt.epsilon_start;
  g.epsilon_floor = opt.epsilon_floor;
  g.mode = parse_bracket_mode(opt.mode);
  g.solve.tol_residual = opt.tol_residual;
  g.extrapolate = !opt.no_extrapolate;
  if (!opt.schedule.empty()) {
    std::vector<double> radii = parse_schedule(opt.schedule);
    if (radii.empty()) throw std::invalid_argument("empty --schedule");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (std::fabs(radii[i] - 2.0 * radii[i - 1]) > 1e-9 * radii[i])
        throw std::invalid_argument("--schedule must double: r0,2r0,4r0,...");
    g.r0 = radii.front();
    g.balls = static_cast<int>(radii.size());
  }
  if (opt.grid_nodes > 0) g.nodes_per_unit = static_cast<double>(opt.grid_nodes);
  return g;
}

}  // namespace

RunManifest::RunManifest(std::string command, std::string out_dir)
    : command_(std::move(command)),
      dir_(out_dir.empty() ? std::string("selpde-out") : std::move(out_dir)),
      t0_(now_seconds()) {
  std::filesystem::create_directories(dir_);
}

void RunManifest::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void RunManifest::add(const std::string& key, double value) {
  entries_.emplace_back(key, format_g17(value));
}

void RunManifest::note_problem(const std::string& path) {
  add("problem", path);
  add("problem_hash", "fnv1a64:" + hash_hex(hash_file(path)));
}

void RunManifest::emit(const std::string& name, const std::string& content) {
  write_text_atomic(dir_ + "/" + name, content);
  outputs_.emplace_back(name, hash_hex(fnv1a64(content)));
}

void RunManifest::verdict(const std::string& v) { verdict_ = v; }

void RunManifest::close() {
  if (closed_) return;
  closed_ = true;
  std::ostringstream out;
  out << "# selpde-run v1\n";
  out << "command = " << command_ << "\n";
  out << "version = " << kToolVersion << "\n";
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
  for (const auto& [name, hash] : outputs_)
    out << "output = " << name << " fnv1a64:" << hash << "\n";
  out << "verdict = " << verdict_ << "\n";
  out << "duration_seconds = " << format_g17(now_seconds() - t0_) << "\n";
  write_text_atomic(dir_ + "/manifest.txt", out.str());
}

std::string manifest_comparable(const std::string& manifest_text) {
  const std::string key = "duration_seconds = ";
  std::size_t pos = manifest_text.rfind(key);
  if (pos == std::string::npos) return manifest_text;
  return manifest_text.substr(0, pos);
}

int cmd_check(const RunOptions& opt, std::ostream& out) {
  Problem p;
  try {
    p = parse_problem_file(opt.problem_path);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  RunManifest man("check", opt.out_dir);
  man.note_problem(opt.problem_path);
  AssumptionReport rep = check_assumptions(p);
  out << render_report(rep, p);

  std::ostringstream kv;
  kv << "ac2_pass = " << (rep.ac2_pass ? 1 : 0) << "\n";
  kv << "ac2_worst_field = " << rep.ac2_worst_field << "\n";
  kv << "ac2_worst_value = " << format_g17(rep.ac2_worst_value) << "\n";
  kv << "ac2_worst_where = " << rep.ac2_worst_where << "\n";
  kv << "a3_checked = " << (rep.a3_checked ? 1 : 0) << "\n";
  kv << "a3_finite = " << (rep.a3_finite ? 1 : 0) << "\n";
  kv << "a3_value = " << format_g17(rep.a3_value) << "\n";
  kv << "mu_available = " << (rep.mu_available ? 1 : 0) << "\n";
  kv << "mu = " << format_g17(rep.mu) << "\n";
  kv << "mu_fit_rms = " << format_g17(rep.mu_fit_rms) << "\n";
  kv << "mu_admissible = " << (rep.mu_admissible ? 1 : 0) << "\n";
  kv << "holder_continuity = assumed\n";
  man.emit("report.txt", kv.str());

  const bool pass = rep.pass(p.domain.kind == DomainKind::wholespace);
  man.verdict(pass ? "pass" : "fail");
  man.close();
  return pass ? kExitOk : kExitFailedVerdict;
}

int cmd_solve_bounded(const RunOptions& opt, std::ostream& out) {
  Problem p;
  try {
    p = parse_problem_file(opt.problem_path);
    if (!p.domain.bounded())
      throw std::runtime_error("solve-bounded needs a bounded-domain problem");
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  GridPtr grid;
  const std::size_t nodes = opt.grid_nodes ? opt.grid_nodes : 513;
  if (p.domain.kind == DomainKind::ball) {
    const double R = opt.radius > 0 ? opt.radius : p.domain.radius;
    grid = make_radial_grid(R, nodes, p.dim);
  } else if (p.dim == 1) {
    grid = make_interval_grid(p.domain.lo[0], p.domain.hi[0], nodes);
  } else {
    const std::size_t side = opt.grid_nodes ? opt.grid_nodes : 129;
    grid = make_rect2d_grid(p.domain.lo[0], p.domain.hi[0], p.domain.lo[1], p.domain.hi[1],
                            side, side);
  }

  RunManifest man("solve-bounded", opt.out_dir);
  man.note_problem(opt.problem_path);
  man.add("mode", opt.mode);
  man.add("grid_nodes", static_cast<double>(grid->size()));
  man.add("epsilon_start", opt.epsilon_start);
  man.add("epsilon_floor", opt.epsilon_floor);
  man.add("tol_residual", opt.tol_residual);
  man.add("tol_cauchy", opt.tol_cauchy);

  GlobalOptions g = global_options_from(opt);
  int code = kExitOk;
  try {
    BracketPair bracket = build_bracket(p, grid, opt.epsilon_start,
                                        parse_bracket_mode(opt.mode));
    man.add("sigma1", bracket.sigma1);
    man.add("m2", bracket.m2);
    man.add("M1", bracket.M1);
    man.emit("sub.field", field_to_string(bracket.sub_base));
    man.emit("super.field", field_to_string(bracket.super_base));

    auto [u, trace] = epsilon_continuation(p, grid, g.epsilon_schedule(), g);
    man.emit("solution.field", field_to_string(u));
    man.emit("trace.csv", csv_to_string(continuation_csv(trace)));

    CsvTable newton;
    newton.columns = {"step", "residual_inf", "repairs"};
    const SolveReport& last = trace.reports.back();
    for (std::size_t i = 0; i < last.residual_history.size(); ++i) {
      newton.rows.push_back({static_cast<double>(i), last.residual_history[i],
                             i == 0 ? 0.0
                                    : static_cast<double>(last.repairs_history[i - 1])});
    }
    man.emit("newton.csv", csv_to_string(newton));

    double slack = HUGE_VAL;
    for (std::size_t i = 0; i < u.size(); ++i)
      slack = std::min(slack, std::min(u[i] - bracket.sub_base[i],
                                       bracket.super_base[i] - u[i]));
    man.add("bracket_min_slack", slack);
    man.add("final_residual", last.final_residual);
    man.add("epsilon_reached", trace.epsilons.back());

    const bool ok = trace.cauchy && last.converged;
    man.verdict(ok ? "converged" : (trace.stalled ? "stalled" : "schedule-exhausted"));
    out << "solve-bounded: " << (ok ? "converged" : "non-converged")
        << ", epsilon reached " << format_g17(trace.epsilons.back())
        << ", final residual " << format_g17(last.final_residual)
        << ", bracket slack " << format_g17(slack) << "\n";
    code = ok ? kExitOk : kExitFailedVerdict;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    man.verdict("error");
    code = kExitFailedVerdict;
  }
  man.close();
  return code;
}

int cmd_barrier(const RunOptions& opt, std::ostream& out) {
  Problem p;
  try {
    p = parse_problem_file(opt.problem_path);
    if (p.dim <= 2) throw std::runtime_error("barrier needs dim > 2");
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  RunManifest man("barrier", opt.out_dir);
  man.note_problem(opt.problem_path);
  int code = kExitOk;
  try {
    RadialBarrier barrier(p);
    CsvTable csv;
    csv.columns = {"r", "w", "w_nested"};
    csv.rows.push_back({0.0, barrier.w(0.0), barrier.w_nested(0.0)});
    const int samples = 121;
    for (int i = 0; i < samples; ++i) {
      const double r = 1e-2 * std::pow(1e6, static_cast<double>(i) / (samples - 1));
      csv.rows.push_back({r, barrier.w(r), barrier.w_nested(r)});
    }
    man.emit("barrier.csv", csv_to_string(csv));
    DecayFit fit = fit_barrier_slope(barrier);
    man.add("K", barrier.K());
    man.add("w_slope", fit.slope);
    man.add("w_slope_window", format_g17(fit.window_lo) + ".." + format_g17(fit.window_hi));
    man.verdict("computed");
    out << "barrier: K = " << format_g17(barrier.K()) << ", asymptotic slope "
        << format_g17(fit.slope) << "\n";
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    man.verdict("error");
    code = kExitFailedVerdict;
  }
  man.close();
  return code;
}

int cmd_solve_global(const RunOptions& opt, std::ostream& out) {
  if (opt.barrier_only) return cmd_barrier(opt, out);
  Problem p;
  try {
    p = parse_problem_file(opt.problem_path);
    if (p.domain.kind != DomainKind::wholespace)
      throw std::runtime_error("solve-global needs a whole-space problem");
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  RunManifest man("solve-global", opt.out_dir);
  man.note_problem(opt.problem_path);

  // Never succeed with unverified hypotheses in whole-space mode.
  AssumptionReport rep = check_assumptions(p);
  if (!rep.pass(true)) {
    out << render_report(rep, p);
    out << "hypotheses not verified; aborting\n";
    man.verdict("hypotheses-failed");
    man.close();
    return kExitFailedVerdict;
  }

  GlobalOptions g = global_options_from(opt);
  man.add("mode", opt.mode);
  man.add("r0", g.r0);
  man.add("balls", static_cast<double>(g.balls));
  man.add("nodes_per_unit", g.nodes_per_unit);
  man.add("epsilon_start", g.epsilon_start);
  man.add("epsilon_floor", g.epsilon_floor);
  man.add("tol_residual", g.solve.tol_residual);
  man.add("tol_cauchy", g.tol_cauchy);
  man.add("tol_exhaust", g.tol_exhaust);
  man.add("mu_estimate", rep.mu_available ? rep.mu : 0.0);

  int code = kExitOk;
  try {
    GlobalSolution sol = exhaust(p, g);

    CsvTable trace;
    trace.columns = {"k", "R_k", "supdiff", "barrier_margin"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double min_margin = HUGE_VAL;
    for (std::size_t k = 0; k < sol.balls.size(); ++k) {
      const BallRecord& b = sol.balls[k];
      trace.rows.push_back({static_cast<double>(k), b.R,
                            k == 0 ? nan : sol.trace_supdiff[k - 1], b.barrier_margin});
      min_margin = std::min(min_margin, b.barrier_margin);
      std::ostringstream name;
      name << "ball_" << k << ".field";
      man.emit(name.str(), field_to_string(b.u));
      man.add("bracket_slack_ball_" + std::to_string(k), b.bracket_slack);
    }
    man.emit("trace.csv", csv_to_string(trace));

    CsvTable decay;
    decay.columns = {"r", "u", "w"};
    const Grid& fg = *sol.final_field.grid;
    for (std::size_t i = 0; i < fg.size(); ++i)
      decay.rows.push_back({fg.xs[i], sol.final_field[i], sol.barrier->w(fg.xs[i])});
    man.emit("decay.csv", csv_to_string(decay));

    DecayFit ufit = decay_fit(sol, rep.mu_available ? rep.mu : 0.0);
    DecayFit wfit = fit_barrier_slope(*sol.barrier);
    man.add("K", sol.barrier->K());
    man.add("u_slope", ufit.ok ? ufit.slope : 0.0);
    man.add("u_slope_ok", ufit.ok ? 1.0 : 0.0);
    man.add("w_slope", wfit.slope);
    man.add("extrapolated", sol.extrapolated ? 1.0 : 0.0);
    man.add("extrapolation_mu", sol.extrapolation_mu);
    man.add("barrier_margin_min", min_margin);

    std::string verdict;
    if (sol.cauchy) {
      verdict = "converged";
      code = kExitOk;
    } else if (sol.trace_supdiff.size() >= 2 && sol.trace_decreasing) {
      // Geometric decrease of the trace: the limit gap is bounded by the
      // last diff over (ratio - 1); report as extrapolated convergence.
      verdict = "extrapolated";
      code = kExitOk;
    } else {
      verdict = "non-cauchy";
      code = kExitFailedVerdict;
    }
    man.verdict(verdict);

    out << "solve-global: " << verdict << "\n";
    out << "barrier margin min over all nodes: " << format_g17(min_margin) << "\n";
    if (ufit.ok)
      out << "decay fit: u slope " << format_g17(ufit.slope);
    else
      out << "decay fit: refused (" << ufit.refusal << ")";
    out << ", w slope " << format_g17(wfit.slope);
    if (rep.mu_available) out << ", predicted " << format_g17(2.0 - rep.mu);
    out << "\n";
  } catch (const BarrierViolation& e) {
    out << "barrier violation: " << e.what() << "\n";
    man.verdict("barrier-violation");
    code = kExitBarrierViolation;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    man.verdict("error");
    code = kExitFailedVerdict;
  }
  man.close();
  return code;
}

int cmd_transform(const RunOptions& opt, std::ostream& out) {
  Problem p;
  DiscreteField w;
  TransformSpec spec;
  try {
    p = parse_problem_file(opt.problem_path);
    w = read_field_file(opt.input_field);
    spec = opt.kind == "power" ? TransformSpec::power(opt.delta)
                               : TransformSpec::exponential();
    if (opt.kind != "power" && opt.kind != "exponential")
      throw std::runtime_error("unknown transform kind '" + opt.kind + "'");
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  RunManifest man("transform", opt.out_dir);
  man.note_problem(opt.problem_path);
  man.add("kind", spec.name());
  if (spec.kind == TransformSpec::Kind::power) man.add("delta", spec.delta);
  man.add("c_star", spec.c_star());
  out << "induced c* = " << format_g17(spec.c_star()) << "\n";

  int code = kExitOk;
  try {
    std::vector<std::pair<double, double>> rows;
    TransformResidualReport rep = verify_transform_residual(spec, p.a, w, 0.05, &rows);
    CsvTable csv;
    csv.columns = {"r", "residual"};
    for (const auto& [r, res] : rows) csv.rows.push_back({r, res});
    man.emit("residual.csv", csv_to_string(csv));
    man.add("max_residual", rep.max_residual);
    man.add("window_nodes", static_cast<double>(rep.window_nodes));

    // Nodewise inversion with the blow-up made explicit: w = 0 at Dirichlet
    // nodes maps to u = +inf; only negative w is a domain violation.
    DiscreteField u(w.grid, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] < 0.0) throw std::domain_error("inverse transform needs w >= 0");
      if (w[i] == 0.0) {
        u[i] = std::numeric_limits<double>::infinity();
        continue;
      }
      u[i] = spec.kind == TransformSpec::Kind::exponential
                 ? -std::log(w[i])
                 : std::pow(w[i] / spec.C(), -spec.C());
    }
    man.emit("transformed.field", field_to_string(u));

    if (opt.round_trip) {
      DiscreteField back = forward_map(spec, u);
      double err = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        err = std::max(err, std::fabs(back[i] - w[i]) / std::max(1e-300, std::fabs(w[i])));
      man.add("round_trip_max_rel_error", err);
      out << "round trip max relative error = " << format_g17(err) << "\n";
    }
    out << "blow-up residual max over window = " << format_g17(rep.max_residual) << "\n";
    man.verdict("computed");
  } catch (const std::domain_error& e) {
    out << "domain violation: " << e.what() << "\n";
    man.verdict("domain-violation");
    code = kExitFailedVerdict;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    man.verdict("error");
    code = kExitFailedVerdict;
  }
  man.close();
  return code;
}

int cmd_report(const RunOptions& opt, std::ostream& out) {
  std::string text;
  try {
    text = read_text_file(opt.out_dir + "/manifest.txt");
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  out << text;
  int code = kExitOk;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("output = ", 0) != 0) continue;
    const std::string rest = line.substr(9);
    const std::size_t sep = rest.find(" fnv1a64:");
    if (sep == std::string::npos) {
      out << "malformed output line: " << line << "\n";
      code = kExitFailedVerdict;
      continue;
    }
    const std::string name = rest.substr(0, sep);
    const std::string want = rest.substr(sep + 9);
    try {
      const std::string got = hash_hex(hash_file(opt.out_dir + "/" + name));
      if (got != want) {
        out << "hash mismatch for " << name << ": recorded " << want << ", actual " << got
            << "\n";
        code = kExitFailedVerdict;
      }
    } catch (const std::exception& e) {
      out << "missing output " << name << ": " << e.what() << "\n";
      code = kExitFailedVerdict;
    }
  }
  out << (code == kExitOk ? "report: all recorded outputs verified\n"
                          : "report: inconsistencies found\n");
  return code;
}

}  // namespace selpde
