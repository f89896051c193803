#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "levybsde/cli/config.hpp"
#include "levybsde/cli/runner.hpp"
#include "levybsde/cli/scenarios.hpp"
#include "levybsde/rng.hpp"
#include "levybsde/solver.hpp"
#include "levybsde/spdie_bridge.hpp"
#include "levybsde/verification.hpp"

using namespace levybsde;
using namespace levybsde::cli;
namespace fs = std::filesystem;

namespace {

std::size_t g_threads = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Settings scenario(const std::string& name, const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  auto config = scenario_config(name);
  for (const auto& [k, v] : overrides) config.set(k, v);
  return Settings::from(config);
}

double max_abs(const NodeMatrix& m, double shift = 0.0) {
  double w = 0.0;
  for (double v : m.values()) w = std::max(w, std::abs(v - shift));
  return w;
}

Outcome orthonormality() {
  const auto s = scenario("two-atom-demo");
  const auto model = build_measure(s.atoms, s.sigma0, s.drift);
  const auto basis = orthonormal_basis(model, 2);
  double worst = 0.0;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      worst = std::max(worst, std::abs(inner_product(model, basis.q(i), basis.q(j)) - (i == j ? 1.0 : 0.0)));
  return {worst <= 1e-10, "max |<q_i,q_j> - delta_ij| = " + num(worst) + " (limit 1e-10)"};
}

Outcome martingale_bracket() {
  const auto model = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  const auto basis = orthonormal_basis(model, 1);
  const auto grid = TimeGrid::make(0.0, 1.0, 100);
  const double dt = grid.dt();
  const std::size_t chunk = 10000, chunks = 10;
  double sh = 0.0, shh = 0.0;
  double sd = 0.0, sv = 0.0, svv = 0.0;
  std::size_t n_inc = 0;
  SimulationOptions opt;
  opt.brownian = BrownianMode::Zero;
  opt.threads = g_threads;
  for (std::size_t c = 0; c < chunks; ++c) {
    const auto b = simulate_bundle(model, basis, grid, chunk, mix_seed(2024, c), opt);
    const auto& h = b.teugels(1);
    for (double v : h.row(h.nodes() - 1)) {
      sh += v;
      shh += v * v;
    }
    for (std::size_t i = 0; i + 1 < h.nodes(); ++i)
      for (std::size_t p = 0; p < chunk; ++p) {
        const double d = h(i + 1, p) - h(i, p);
        sd += d;
        sv += d * d / dt;
        svv += d * d / dt * (d * d / dt);
        ++n_inc;
      }
  }
  const double n = static_cast<double>(chunk * chunks);
  const double mean = sh / n;
  const double se_mean = std::sqrt((shh / n - mean * mean) / n);
  const double ni = static_cast<double>(n_inc);
  const double mean_d = sd / ni;
  const double bracket = sv / ni - mean_d * mean_d / dt;
  const double se_bracket = std::sqrt((svv / ni - (sv / ni) * (sv / ni)) / ni);
  const bool ok = std::abs(mean) <= 5.0 * se_mean && std::abs(bracket - 1.0) <= 5.0 * se_bracket;
  return {ok, "mean H1_T = " + num(mean) + " (5 se = " + num(5.0 * se_mean) + "), cov/dt - 1 = " +
                  num(bracket - 1.0) + " (5 se = " + num(5.0 * se_bracket) + "), 1e5 paths"};
}

Outcome compensation() {
  const auto model = build_measure({{1.0, 1.0}}, 0.0, 0.0);
  const auto basis = orthonormal_basis(model, 2);
  SimulationOptions opt;
  opt.threads = g_threads;
  const auto bundle = simulate_bundle(model, basis, TimeGrid::make(0.0, 1.0, 100), 10000, 77, opt);
  const auto audit = audit_compensation(model, basis, bundle, [](double, double y) { return y * y; }, 1.0, 1e-10);
  const auto& sel = audit.selected == InnerProductConvention::Nu ? audit.nu : audit.mu;
  const bool ok = audit.exact && sel.max_abs_gap <= 1e-10;
  return {ok, std::string("convention ") + (audit.selected == InnerProductConvention::Nu ? "nu" : "mu") +
                  ", max per-path gap = " + num(sel.max_abs_gap) + " (limit 1e-10; other convention " +
                  num(audit.selected == InnerProductConvention::Nu ? audit.mu.max_abs_gap : audit.nu.max_abs_gap) +
                  "), 1e4 paths"};
}

Outcome degenerate_solve() {
  const auto s = scenario("constant-terminal");
  const auto input = prepare_input(s, g_threads);
  const auto sol = fixed_point_solve(s.problem(), input, s.scheme, s.basis, s.fixed_point, g_threads);
  double z = 0.0;
  for (const auto& zj : sol.Z) z = std::max(z, max_abs(zj));
  const double ey = max_abs(sol.Y, s.xi_c), ek = max_abs(sol.K);
  const bool ok = ey <= 1e-12 && z <= 1e-12 && ek <= 1e-12;
  return {ok, "max |Y - xi| = " + num(ey) + ", max |Z| = " + num(z) + ", max |K| = " + num(ek) + " (limit 1e-12)"};
}

double linear_ode_y0(int n_steps) {
  const auto s = scenario("linear-ode", {{"grid.n_steps", std::to_string(n_steps)}});
  const auto input = prepare_input(s, g_threads);
  return fixed_point_solve(s.problem(), input, s.scheme, s.basis, s.fixed_point, g_threads).mean_y(0);
}

Outcome linear_ode() {
  const double target = std::exp(-1.0);
  const double e_fine = std::abs(linear_ode_y0(1000) - target);
  const double e_coarse = std::abs(linear_ode_y0(500) - target);
  const double ratio = e_fine / e_coarse;
  const bool ok = e_fine <= 1e-2 && ratio >= 0.3 && ratio <= 0.7;
  return {ok, "|Y_0 - e^-1| = " + num(e_fine) + " at dt = 1e-3, error ratio dt/2dt = " + num(ratio) +
                  " (need [0.3, 0.7])"};
}

Outcome penalization() {
  const auto s = scenario("deterministic-obstacle");
  const auto input = prepare_input(s, g_threads);
  const auto sweep = penalization_sweep(s.problem(), input, s.basis, s.n_list, s.fixed_point, g_threads);
  bool monotone = true, rate = true;
  std::string ratios;
  for (std::size_t k = 1; k < sweep.rows.size(); ++k) {
    monotone = monotone && sweep.rows[k].y0 >= sweep.rows[k - 1].y0;
    const double r = sweep.rows[k].gap_to_direct / sweep.rows[k - 1].gap_to_direct;
    rate = rate && r >= 0.35 && r <= 0.65;
    ratios += (k > 1 ? " " : "") + num(r);
  }
  return {monotone && rate && sweep.rows.size() == 9,
          std::string("Y_0^n nondecreasing: ") + (monotone ? "yes" : "no") + ", gap ratios " + ratios +
              " (need [0.35, 0.65])"};
}

Outcome skorokhod() {
  const auto s = scenario("deterministic-obstacle");
  const auto input = prepare_input(s, g_threads);
  const auto problem = s.problem();
  const auto direct = fixed_point_solve(problem, input, {Scheme::Direct, 0.0}, s.basis, s.fixed_point, g_threads);
  const auto pen = fixed_point_solve(problem, input, {Scheme::Penalized, 256.0}, s.basis, s.fixed_point, g_threads);
  double d = 0.0, p = 0.0;
  for (double r : skorokhod_residuals(direct)) d = std::max(d, std::abs(r));
  for (double r : skorokhod_residuals(pen)) p = std::max(p, std::abs(r));
  return {d == 0.0 && p <= 1e-2, "direct residual = " + num(d) + " (need exactly 0), penalized n=256 residual = " +
                                     num(p) + " (limit 1e-2)"};
}

Outcome comparison() {
  const std::vector<std::pair<std::string, std::string>> base{
      {"model.atoms", "none"}, {"model.sigma0", "1"},         {"model.m", "1"},
      {"grid.n_steps", "100"}, {"monte_carlo.n_paths", "1000"}, {"problem.xi_x", "1"},
      {"problem.f_y", "-0.5"}, {"problem.f_z", "0.2"}};
  auto s2 = Settings::from([&] {
    auto c = Config::defaults();
    for (const auto& [k, v] : base) c.set(k, v);
    return c;
  }());
  auto s1 = s2;
  s1.xi_c = s2.xi_c + 1.0;
  const auto input = prepare_input(s2, g_threads);
  const auto rep = check_comparison(s1.problem(), s2.problem(), input, s2.scheme, s2.basis, s2.fixed_point, g_threads);
  const bool ok = rep.hypotheses_verified && rep.holds() && rep.min_diff >= -rep.epsilon_reg && rep.epsilon_reg < 1e-3;
  return {ok, "min (Y1 - Y2) = " + num(rep.min_diff) + ", eps_reg = " + num(rep.epsilon_reg) +
                  " (need < 1e-3), violations = " + std::to_string(rep.violation_count) + ", 1e3 jump-free paths"};
}

Outcome fixed_point() {
  const auto s = scenario("linear-ode", {{"problem.g_y", "0.5"}});
  const auto input = prepare_input(s, g_threads);
  const auto sol = fixed_point_solve(s.problem(), input, s.scheme, s.basis, s.fixed_point, g_threads);
  bool ratios_ok = true;
  double worst_ratio = 0.0;
  for (double r : sol.contraction_ratios) {
    ratios_ok = ratios_ok && r < 1.0;
    worst_ratio = std::max(worst_ratio, r);
  }
  const double last = sol.deltas.back();
  const auto s0 = scenario("linear-ode", {{"problem.g_c", "0.3"}});
  const auto sol0 = fixed_point_solve(s0.problem(), input, s0.scheme, s0.basis, s0.fixed_point, g_threads);
  const bool ok = ratios_ok && last < 1e-8 && sol.iterations <= 25 && sol0.iterations == 1;
  return {ok, "g = 0.5y: " + std::to_string(sol.iterations) + " iterations, max ratio " + num(worst_ratio) +
                  ", final delta " + num(last) + "; g constant: " + std::to_string(sol0.iterations) + " iteration(s)"};
}

Outcome poisson_reduction() {
  const auto s = scenario("poisson-example");
  const auto rep = example_poisson(poisson_example_config(s, g_threads));
  const bool ok = rep.solver_max_diff <= 1e-10 && rep.higher_martingales_zero;
  return {ok, "max |Y_generic - Y_specialized| = " + num(rep.solver_max_diff) +
                  " (limit 1e-10), H^(i>=2) identically zero: " + (rep.higher_martingales_zero ? "yes" : "no")};
}

Outcome surface() {
  const auto s = scenario("deterministic-obstacle");
  const auto problem = markovian_problem(s);
  const auto config = surface_config(s, g_threads);
  const auto est = estimate_surface(problem, config);
  double worst = 0.0;
  bool terminal_exact = true;
  for (const auto& pt : est.points) {
    worst = std::max(worst, std::abs(pt.u - (1.0 - pt.t / s.T)));
    if (pt.t == s.T) terminal_exact = terminal_exact && pt.u == problem.l(pt.x);
  }
  const bool ok = worst <= 1e-2 && terminal_exact && est.points.size() == 121;
  return {ok, "max |u - (1 - t/T)| = " + num(worst) + " (limit 1e-2) over " + std::to_string(est.points.size()) +
                  " points at dt = " + num(config.dt) + ", u(T,x) = l(x) exactly: " + (terminal_exact ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  const auto root = fs::temp_directory_path() / "levybsde_acceptance_repro";
  fs::remove_all(root);
  struct Job {
    std::string sub;
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  const std::vector<Job> jobs{
      {"solve", {"--scenario", "two-atom-demo", "--set", "outputs.write_solution=true"}, {"solution.csv", "solution_report.csv"}},
      {"simulate", {"--scenario", "poisson-example"}, {"paths.csv"}},
      {"reflect", {"--scenario", "two-atom-demo"}, {"reflected.csv"}},
      {"sweep", {"--scenario", "two-atom-demo", "--set", "solver.n_list=1,10,100"}, {"sweep.csv"}},
  };
  std::size_t compared = 0, bytes = 0;
  for (const auto& job : jobs) {
    std::vector<fs::path> dirs{root / (job.sub + "_a"), root / (job.sub + "_b")};
    for (const auto& dir : dirs) {
      std::vector<std::string> args{job.sub};
      args.insert(args.end(), job.args.begin(), job.args.end());
      args.insert(args.end(), {"--seed", "31337", "--out", dir.string()});
      std::ostringstream out, err;
      if (run_cli(args, out, err) != 0) return {false, job.sub + " run failed: " + err.str()};
    }
    for (const auto& f : job.files) {
      const auto a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
      if (a.empty() || a != b) return {false, f + " differs between identical runs"};
      ++compared;
      bytes += a.size();
    }
  }
  return {true, std::to_string(compared) + " CSV files byte-identical across two runs (" + std::to_string(bytes) +
                    " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  for (int k = 1; k + 1 < argc; ++k)
    if (std::string(argv[k]) == "--threads") g_threads = static_cast<std::size_t>(std::max(1, std::atoi(argv[k + 1])));

  struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "orthonormality", 1.0, orthonormality},
      {2, "martingale and bracket", 60.0, martingale_bracket},
      {3, "compensation identity", 30.0, compensation},
      {4, "degenerate solve exact", 0.0, degenerate_solve},
      {5, "linear ODE", 0.0, linear_ode},
      {6, "penalization monotone, rate 1/n", 0.0, penalization},
      {7, "Skorokhod condition", 0.0, skorokhod},
      {8, "comparison", 30.0, comparison},
      {9, "fixed point", 0.0, fixed_point},
      {10, "single-atom reduction", 0.0, poisson_reduction},
      {11, "surface representation", 600.0, surface},
      {12, "reproducibility", 0.0, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      outcome.pass = false;
      outcome.detail += "; runtime over " + num(c.time_limit) + " s";
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s  %2d  %-34s %8.3f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
