#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "selpde/runs.hpp"

namespace {

void add_common(CLI::App* cmd, selpde::RunOptions& opt, bool needs_problem = true) {
  if (needs_problem)
    cmd->add_option("problem", opt.problem_path, "problem file")->required();
  cmd->add_option("--out", opt.out_dir, "output directory (default selpde-out)");
}

void add_solver_flags(CLI::App* cmd, selpde::RunOptions& opt) {
  cmd->add_option("--grid-nodes", opt.grid_nodes,
                  "nodes (bounded solves) or nodes per unit radius (global)");
  cmd->add_option("--epsilon-start", opt.epsilon_start, "first epsilon in the schedule");
  cmd->add_option("--epsilon-floor", opt.epsilon_floor, "smallest epsilon solved");
  cmd->add_option("--tol-residual", opt.tol_residual, "nonlinear residual tolerance");
  cmd->add_option("--tol-cauchy", opt.tol_cauchy, "continuation Cauchy tolerance");
  cmd->add_option("--mode", opt.mode, "bracket mode: eigen | poisson | combined");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selpde: singular elliptic solver workbench"};
  app.set_version_flag("--version", std::string(selpde::kToolVersion));
  app.require_subcommand(1);
  selpde::RunOptions opt;

  CLI::App* check = app.add_subcommand("check", "verify problem hypotheses");
  add_common(check, opt);

  CLI::App* bounded = app.add_subcommand("solve-bounded", "epsilon continuation on a bounded domain");
  add_common(bounded, opt);
  add_solver_flags(bounded, opt);
  bounded->add_option("--radius", opt.radius, "override ball radius");

  CLI::App* global = app.add_subcommand("solve-global", "domain exhaustion on the whole space");
  add_common(global, opt);
  add_solver_flags(global, opt);
  global->add_option("--tol-exhaust", opt.tol_exhaust, "exhaustion trace tolerance");
  global->add_option("--schedule", opt.schedule, "comma list of doubling radii, e.g. 2,4,8");
  global->add_flag("--barrier-only", opt.barrier_only, "compute just the decay barrier");
  global->add_flag("--no-extrapolate", opt.no_extrapolate,
                   "keep the last ball solution as the final field");

  CLI::App* barrier = app.add_subcommand("barrier", "tabulate the radial decay barrier");
  add_common(barrier, opt);

  CLI::App* transform = app.add_subcommand("transform", "map a field through a change of variable");
  add_common(transform, opt);
  transform->add_option("--input", opt.input_field, "field file holding w")->required();
  transform->add_option("--kind", opt.kind, "exponential | power");
  transform->add_option("--delta", opt.delta, "power transform exponent (> 1)");
  transform->add_flag("--round-trip", opt.round_trip, "report forward(inverse(w)) error");

  CLI::App* report = app.add_subcommand("report", "verify a run directory against its manifest");
  report->add_option("--out", opt.out_dir, "run directory to verify")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : selpde::kExitBadInput;
  }

  try {
    if (check->parsed()) return selpde::cmd_check(opt, std::cout);
    if (bounded->parsed()) return selpde::cmd_solve_bounded(opt, std::cout);
    if (global->parsed()) return selpde::cmd_solve_global(opt, std::cout);
    if (barrier->parsed()) return selpde::cmd_barrier(opt, std::cout);
    if (transform->parsed()) return selpde::cmd_transform(opt, std::cout);
    if (report->parsed()) return selpde::cmd_report(opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return selpde::kExitFailedVerdict;
  }
  return selpde::kExitBadInput;
}
