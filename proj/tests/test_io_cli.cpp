#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "selpde/fieldio.hpp"
#include "selpde/runs.hpp"

using namespace selpde;
namespace fs = std::filesystem;

namespace {

// ctest runs in the build tree next to the binary; a manual run from the
// repository root finds it one level down.
std::string cli() {
  if (fs::exists("./selpde")) return "./selpde";
  return "./build/selpde";
}

int run_cli(const std::string& args) {
  const std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::path("io_cli_scratch") / tag;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kBounded =
    "dim = 3\ndomain = ball 1\na = 6 + 4*r^2\nc = 1 - r^2\n";
const char* kWhole =
    "dim = 5\ndomain = wholespace\na = (1 + r)^(-4)\nc = 1\n";

}  // namespace

TEST_CASE("field files round-trip bit-exactly on all grid kinds") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  fs::path dir = fresh_dir("roundtrip");

  std::vector<GridPtr> grids = {
      make_radial_grid(1.0, 33, 3),
      make_radial_grid(2.5, 21, 5, 1.7),  // graded radii must survive verbatim
      make_interval_grid(-1.0, 2.0, 17),
      make_rect2d_grid(-1.0, 1.0, 0.0, 2.0, 9, 7),
  };
  for (const GridPtr& g : grids) {
    DiscreteField f(g, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = val(rng);
    const std::string path = (dir / "f.field").string();
    write_field_file(path, f);
    DiscreteField back = read_field_file(path);
    REQUIRE(back.size() == f.size());
    CHECK(back.grid->kind == g->kind);
    CHECK(back.grid->dim == g->dim);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
    for (std::size_t i = 0; i < g->nx(); ++i) CHECK(back.grid->xs[i] == g->xs[i]);
  }
}

TEST_CASE("g17 formatting round-trips doubles exactly") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    double v = std::ldexp(val(rng), (k % 60) - 30);
    CHECK(std::stod(format_g17(v)) == v);
  }
  CHECK(format_g17(0.0) == "0");
}

TEST_CASE("fnv1a64 matches the published test vectors and hashes files stably") {
  CHECK(fnv1a64(std::string{}) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64(std::string{"a"}) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64(std::string{"foobar"}) == 0x85944171f73967e8ULL);
  CHECK(hash_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");

  fs::path dir = fresh_dir("hash");
  write_file(dir / "x.txt", "foobar");
  CHECK(hash_file((dir / "x.txt").string()) == fnv1a64(std::string{"foobar"}));
}

TEST_CASE("csv tables carry 17 significant digits and a header row") {
  CsvTable t;
  t.columns = {"r", "u"};
  t.rows = {{0.0, 1.0 / 3.0}, {0.5, 2.0}};
  const std::string s = csv_to_string(t);
  CHECK(s.find("r,u\n") == 0);
  CHECK(s.find("0.33333333333333331") != std::string::npos);

  fs::path dir = fresh_dir("csv");
  write_csv_atomic((dir / "t.csv").string(), t);
  CHECK(read_text_file((dir / "t.csv").string()) == s);
}

TEST_CASE("atomic writes leave no temporaries and reads reject missing files") {
  fs::path dir = fresh_dir("atomic");
  const std::string path = (dir / "out.txt").string();
  write_text_atomic(path, "payload");
  CHECK(read_text_file(path) == "payload");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);

  CHECK_THROWS(read_text_file((dir / "missing.txt").string()));
  CHECK_THROWS(read_field_file((dir / "missing.field").string()));
  write_file(dir / "junk.field", "not a field file\n");
  CHECK_THROWS(read_field_file((dir / "junk.field").string()));
}

TEST_CASE("cli: check passes a sound whole-space problem and flags a hollow one") {
  fs::path dir = fresh_dir("check");
  write_file(dir / "ok.prob", kWhole);
  write_file(dir / "flat.prob", "dim = 5\ndomain = wholespace\na = 1\nc = 1\n");
  write_file(dir / "bad.prob", "dim = banana\n");

  CHECK(run_cli("check " + (dir / "ok.prob").string() + " --out " + (dir / "ok").string()) == 0);
  CHECK(run_cli("check " + (dir / "flat.prob").string() + " --out " + (dir / "flat").string()) ==
        1);  // a does not integrate: hypotheses fail
  CHECK(run_cli("check " + (dir / "bad.prob").string()) == 2);
  CHECK(run_cli("definitely-not-a-command") == 2);
  CHECK(fs::exists(dir / "ok" / "report.txt"));
  CHECK(fs::exists(dir / "ok" / "manifest.txt"));
}

TEST_CASE("cli: solve-bounded recovers the manufactured solution") {
  fs::path dir = fresh_dir("bounded");
  write_file(dir / "p.prob", kBounded);
  fs::path out = dir / "run";
  CHECK(run_cli("solve-bounded " + (dir / "p.prob").string() + " --grid-nodes 513 --out " +
                out.string()) == 0);

  DiscreteField u = read_field_file((out / "solution.field").string());
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = u.grid->xs[i];
    worst = std::max(worst, std::fabs(u[i] - (1.0 - r * r)));
  }
  CHECK(worst <= 1e-5);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "newton.csv"));
  CHECK(fs::exists(out / "sub.field"));
  CHECK(fs::exists(out / "super.field"));

  const std::string manifest = read_text_file((out / "manifest.txt").string());
  CHECK(manifest.find("# selpde-run v1") == 0);
  CHECK(manifest.find("verdict = converged") != std::string::npos);

  // a floor above the Cauchy tolerance cannot certify convergence
  fs::path shallow = dir / "shallow";
  CHECK(run_cli("solve-bounded " + (dir / "p.prob").string() +
                " --grid-nodes 129 --epsilon-floor 1e-3 --out " + shallow.string()) == 1);
  const std::string m2 = read_text_file((shallow / "manifest.txt").string());
  CHECK(m2.find("epsilon_floor = 0.001") != std::string::npos);
  CHECK(m2.find("verdict = converged") == std::string::npos);
}

TEST_CASE("cli: solve-bounded demands a bounded domain") {
  fs::path dir = fresh_dir("bounded_domain");
  write_file(dir / "w.prob", kWhole);
  CHECK(run_cli("solve-bounded " + (dir / "w.prob").string() + " --out " +
                (dir / "o").string()) == 2);
}

TEST_CASE("cli: a single-ball schedule cannot assess the exhaustion tail") {
  fs::path dir = fresh_dir("single");
  write_file(dir / "w.prob", kWhole);
  CHECK(run_cli("solve-global " + (dir / "w.prob").string() +
                " --schedule 2 --grid-nodes 16 --out " + (dir / "o").string()) == 1);
  const std::string m = read_text_file((dir / "o" / "manifest.txt").string());
  CHECK(m.find("verdict = non-cauchy") != std::string::npos);
}

TEST_CASE("cli: barrier-only run reports K without solving") {
  fs::path dir = fresh_dir("barrier");
  write_file(dir / "w.prob", kWhole);
  CHECK(run_cli("solve-global " + (dir / "w.prob").string() + " --barrier-only --out " +
                (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "barrier.csv"));
  const std::string m = read_text_file((dir / "o" / "manifest.txt").string());
  CHECK(m.find("\nK = 0.055555") != std::string::npos);
}

TEST_CASE("cli: transform verifies the manufactured pair and round-trips") {
  fs::path dir = fresh_dir("transform");
  write_file(dir / "p.prob",
             "dim = 3\ndomain = ball 1\na = (6 - 2*r^2)/(1 - r^2)\nc = 1\n");

  GridPtr g = make_radial_grid(1.0, 129, 3);
  DiscreteField w(g, 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) w[i] = 1.0 - g->xs[i] * g->xs[i];
  write_field_file((dir / "w.field").string(), w);

  CHECK(run_cli("transform " + (dir / "p.prob").string() + " --input " +
                (dir / "w.field").string() + " --kind exponential --round-trip --out " +
                (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "residual.csv"));
  CHECK(fs::exists(dir / "o" / "transformed.field"));

  CHECK(run_cli("transform " + (dir / "p.prob").string() + " --input " +
                (dir / "w.field").string() + " --kind banana --out " +
                (dir / "o2").string()) == 2);
}

TEST_CASE("cli: report verifies manifests and catches tampering") {
  fs::path dir = fresh_dir("report");
  write_file(dir / "p.prob", kBounded);
  fs::path out = dir / "run";
  REQUIRE(run_cli("solve-bounded " + (dir / "p.prob").string() +
                  " --grid-nodes 65 --out " + out.string()) == 0);

  CHECK(run_cli("report --out " + out.string()) == 0);

  std::ofstream tamper(out / "solution.field", std::ios::app);
  tamper << "tampered\n";
  tamper.close();
  CHECK(run_cli("report --out " + out.string()) == 1);

  CHECK(run_cli("report --out " + (dir / "nosuch").string()) == 2);
}

TEST_CASE("cli: identical runs produce byte-identical artifacts") {
  fs::path dir = fresh_dir("determinism");
  write_file(dir / "p.prob", kBounded);
  fs::path a = dir / "a", b = dir / "b";
  REQUIRE(run_cli("solve-bounded " + (dir / "p.prob").string() + " --grid-nodes 257 --out " +
                  a.string()) == 0);
  REQUIRE(run_cli("solve-bounded " + (dir / "p.prob").string() + " --grid-nodes 257 --out " +
                  b.string()) == 0);

  for (const char* name : {"solution.field", "trace.csv", "newton.csv", "sub.field",
                           "super.field"})
    CHECK(read_text_file((a / name).string()) == read_text_file((b / name).string()));

  // manifests agree once the wall-clock line is stripped
  CHECK(manifest_comparable(read_text_file((a / "manifest.txt").string())) ==
        manifest_comparable(read_text_file((b / "manifest.txt").string())));
  CHECK(read_text_file((a / "manifest.txt").string())
            .find("duration_seconds") != std::string::npos);
}
