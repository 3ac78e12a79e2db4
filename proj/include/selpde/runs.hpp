#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "selpde/global.hpp"
#include "selpde/transforms.hpp"

namespace selpde {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by the commands:
//   0 success / hypotheses verified
//   1 hypothesis failure, non-convergence, domain violation
//   2 unreadable or malformed input
//   3 barrier violation (bug signal)
enum ExitCode : int {
  kExitOk = 0,
  kExitFailedVerdict = 1,
  kExitBadInput = 2,
  kExitBarrierViolation = 3,
};

struct RunOptions {
  std::string problem_path;
  std::string out_dir;
  std::size_t grid_nodes = 0;   // 0 = default for the command
  double radius = 0.0;          // 0 = radius from the problem file
  double epsilon_start = 0.5;
  double epsilon_floor = 1e-7;
  double tol_residual = 1e-10;
  double tol_cauchy = 1e-6;
  double tol_exhaust = 1e-5;
  std::string schedule;         // solve-global: comma list of ball radii
  std::string mode = "eigen";   // eigen | poisson | combined
  bool barrier_only = false;
  bool no_extrapolate = false;

  // transform command
  std::string kind = "exponential";  // exponential | power
  double delta = 2.0;
  std::string input_field;
  bool round_trip = false;
};

// Every command writes exactly one manifest into its output directory; the
// wall-clock duration goes on the last line so byte-comparisons of reruns
// can strip it.
class RunManifest {
 public:
  RunManifest(std::string command, std::string out_dir);
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void note_problem(const std::string& path);
  // Writes content atomically under the run directory and records its hash.
  void emit(const std::string& name, const std::string& content);
  void verdict(const std::string& v);
  void close();  // writes manifest.txt (idempotent)

  const std::string& dir() const { return dir_; }

 private:
  std::string command_, dir_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::string verdict_ = "none";
  double t0_;
  bool closed_ = false;
};

int cmd_check(const RunOptions& opt, std::ostream& out);
int cmd_solve_bounded(const RunOptions& opt, std::ostream& out);
int cmd_solve_global(const RunOptions& opt, std::ostream& out);
int cmd_barrier(const RunOptions& opt, std::ostream& out);
int cmd_transform(const RunOptions& opt, std::ostream& out);
int cmd_report(const RunOptions& opt, std::ostream& out);

// Strips the trailing duration line; reruns must match byte-for-byte on the
// remainder.
std::string manifest_comparable(const std::string& manifest_text);

}  // namespace selpde
