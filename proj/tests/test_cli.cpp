#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "levybsde/cli/config.hpp"
#include "levybsde/cli/runner.hpp"
#include "levybsde/cli/scenarios.hpp"
#include "levybsde/errors.hpp"

using namespace levybsde;
using namespace levybsde::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("levybsde_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("scenario catalogue") {
  const auto& cat = scenario_catalogue();
  REQUIRE_FALSE(cat.empty());
  bool found = false;
  for (const auto& s : cat) found = found || s.name == "poisson-example";
  CHECK(found);
  const auto r = run({"scenarios"});
  CHECK(r.code == 0);
  for (const char* name : {"constant-terminal", "linear-ode", "deterministic-obstacle", "poisson-example", "two-atom-demo"})
    CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("each scenario round-trips through config serialization") {
  for (const auto& s : scenario_catalogue()) {
    CAPTURE(s.name);
    const auto config = scenario_config(s.name);
    auto back = Config::defaults();
    back.load_text(config.serialize(), "roundtrip");
    CHECK(back.serialize() == config.serialize());
    CHECK_NOTHROW(Settings::from(back));
  }
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  auto c = Config::defaults();
  CHECK_THROWS_WITH_AS(c.set("solver.degre", "2"), doctest::Contains("solver.degre"), ValidationError);
  CHECK_THROWS_AS(c.load_text("[model]\nbogus = 1\n", "x"), ValidationError);
  CHECK_THROWS_AS(c.load_text("atoms = 1:1\n", "x"), ValidationError);
  CHECK_THROWS_AS(c.apply_override("solver.degree"), ValidationError);
  c.load_text("# comment\n[solver]\ndegree = 3  # trailing\n", "x");
  CHECK(c.get("solver.degree") == "3");

  auto bad = Config::defaults();
  bad.set("grid.n_steps", "0");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("grid.n_steps"), ValidationError);
  bad = Config::defaults();
  bad.set("monte_carlo.seed", "-4");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("monte_carlo.seed"), ValidationError);
  bad = Config::defaults();
  bad.set("problem.g_alpha", "1.5");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("problem.g_alpha"), ValidationError);
  bad = Config::defaults();
  bad.set("solver.n_list", "1,4,2");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("solver.n_list"), ValidationError);
  bad = Config::defaults();
  bad.set("model.atoms", "1;1");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("model.atoms"), ValidationError);
  bad = Config::defaults();
  bad.set("problem.increasing", "local-time");
  CHECK_THROWS_WITH_AS(Settings::from(bad), doctest::Contains("problem.increasing"), ValidationError);
}

TEST_CASE("solve on the constant-terminal scenario") {
  const auto dir = scratch("solve");
  const auto r = run({"solve", "--scenario", "constant-terminal", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("Y_0 = 1\n") != std::string::npos);
  CHECK(fs::exists(dir / "solution_report.csv"));
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(slurp(dir / "manifest.txt").find("exit_code = 0") != std::string::npos);
}

TEST_CASE("config file plus overrides") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "[problem]\nscenario = linear-ode\n\n[grid]\nn_steps = 40\n";
  }
  const auto r = run({"solve", "--config", (dir / "run.cfg").string(), "--set", "monte_carlo.n_paths=30", "--out",
                      (dir / "out").string()});
  CHECK(r.code == 0);
  const auto manifest = slurp(dir / "out" / "manifest.txt");
  CHECK(manifest.find("n_steps = 40") != std::string::npos);
  CHECK(manifest.find("n_paths = 30") != std::string::npos);
  CHECK(manifest.find("f_y = -1") != std::string::npos);
}

TEST_CASE("validation errors exit 1 and still write the manifest") {
  const auto dir = scratch("invalid");
  const auto r = run({"solve", "--scenario", "linear-ode", "--set", "solver.degree=99", "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("solver.degree") != std::string::npos);
  CHECK(slurp(dir / "manifest.txt").find("exit_code = 1") != std::string::npos);

  CHECK(run({"solve", "--set", "nope.key=1", "--out", dir.string()}).code == 1);
  CHECK(run({"solve", "--scenario", "no-such-scenario", "--out", dir.string()}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"solve", "--threads", "0"}).code == 1);
}

TEST_CASE("solver failures exit 2") {
  const auto dir = scratch("solver_error");
  const auto r = run({"solve", "--scenario", "linear-ode", "--set", "problem.g_y=0.5", "--set", "solver.max_iter=1",
                      "--set", "grid.n_steps=20", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("ratio") != std::string::npos);
}

TEST_CASE("verify on a corrupted solution exits 3 and names the property") {
  const auto dir = scratch("verify");
  const auto r = run({"verify", "--solution", LEVYBSDE_FIXTURE_DIR "/corrupted_solution.csv", "--out", dir.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("k_monotone") != std::string::npos);
  CHECK(fs::exists(dir / "verification.json"));
  CHECK(slurp(dir / "verification.txt").find("k_monotone") != std::string::npos);

  const auto ok = run({"verify", "--scenario", "two-atom-demo", "--set", "monte_carlo.n_paths=200", "--out",
                       (dir / "ok").string()});
  CHECK(ok.code == 0);
}

TEST_CASE("sweep over n_list = 1,2,4,8 on the deterministic obstacle") {
  const auto dir = scratch("sweep");
  const auto r = run({"sweep", "--scenario", "deterministic-obstacle", "--set", "solver.n_list=1,2,4,8", "--set",
                      "grid.n_steps=400", "--set", "monte_carlo.n_paths=4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("n,Y_0,", 0) == 0);
  std::vector<double> y0;
  while (std::getline(csv, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    y0.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  REQUIRE(y0.size() == 4);
  for (std::size_t k = 1; k < y0.size(); ++k) CHECK(y0[k] >= y0[k - 1]);
}

TEST_CASE("every subcommand runs on a small configuration") {
  const std::vector<std::string> small{"--set", "monte_carlo.n_paths=50", "--set", "grid.n_steps=20"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), small.begin(), small.end());
    return run(args);
  };
  const auto dir = scratch("all");
  CHECK(with({"basis", "--scenario", "two-atom-demo", "--out", (dir / "b").string()}).code == 0);
  CHECK(count_lines(slurp(dir / "b" / "basis.csv")) == 3);
  CHECK(with({"simulate", "--scenario", "two-atom-demo", "--out", (dir / "s").string()}).code == 0);
  CHECK(count_lines(slurp(dir / "s" / "paths.csv")) == 1 + 20 * 21);
  CHECK(with({"reflect", "--scenario", "two-atom-demo", "--out", (dir / "r").string()}).code == 0);
  CHECK(with({"reflect", "--scenario", "linear-ode", "--out", (dir / "r2").string()}).code == 1);
  CHECK(with({"surface", "--scenario", "two-atom-demo", "--set", "grid.surface_t_points=2", "--set",
              "grid.surface_x_points=4", "--out", (dir / "u").string()})
            .code == 0);
  CHECK(count_lines(slurp(dir / "u" / "surface.csv")) == 9);
  CHECK(with({"example-poisson", "--scenario", "poisson-example", "--out", (dir / "e").string()}).code == 0);
  CHECK(slurp(dir / "e" / "poisson_report.json").find("solver_max_diff") != std::string::npos);
  CHECK(with({"example-poisson", "--scenario", "two-atom-demo", "--out", (dir / "e2").string()}).code == 1);
}

TEST_CASE("identical config and seed give byte-identical csv outputs") {
  const std::vector<std::string> args{"--scenario", "two-atom-demo", "--set", "outputs.write_solution=true",
                                      "--set", "monte_carlo.n_paths=300"};
  auto a = args, b = args, c = args;
  const auto da = scratch("repro_a"), db = scratch("repro_b"), dc = scratch("repro_c");
  a.insert(a.begin(), "solve");
  b.insert(b.begin(), "solve");
  c.insert(c.begin(), "solve");
  a.insert(a.end(), {"--out", da.string(), "--seed", "99"});
  b.insert(b.end(), {"--out", db.string(), "--seed", "99", "--threads", "3"});
  c.insert(c.end(), {"--out", dc.string(), "--seed", "100"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  REQUIRE(run(c).code == 0);
  CHECK(slurp(da / "solution.csv") == slurp(db / "solution.csv"));
  CHECK(slurp(da / "solution_report.csv") == slurp(db / "solution_report.csv"));
  CHECK(slurp(da / "solution.csv") != slurp(dc / "solution.csv"));
}
