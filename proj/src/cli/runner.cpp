#include "levybsde/cli/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "levybsde/cli/config.hpp"
#include "levybsde/cli/scenarios.hpp"
#include "levybsde/csv.hpp"
#include "levybsde/errors.hpp"
#include "levybsde/kernels.hpp"
#include "levybsde/levy_basis.hpp"
#include "levybsde/path_engine.hpp"
#include "levybsde/reflected_forward.hpp"
#include "levybsde/solver.hpp"
#include "levybsde/spdie_bridge.hpp"
#include "levybsde/verification.hpp"

namespace levybsde::cli {

namespace {

namespace fs = std::filesystem;

std::vector<double> linspace(double a, double b, int n);

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string subcommand;
  std::string config_path;
  std::string scenario;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out_dir;
  std::string solution_path;
};

struct Run {
  Settings s;
  std::size_t threads = 1;
  fs::path dir;
  std::ostringstream summary;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "' (config key 'outputs.dir')");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

std::string fmt(double v) { return format_double(v); }

LevyMeasureModel make_model(const Settings& s) { return build_measure(s.atoms, s.sigma0, s.drift); }

ReflectedCoefficients make_reflection(const Settings& s) {
  const double c = s.sigma_c, b = s.sigma_abs;
  return ReflectedCoefficients::make(s.theta, [c, b](double x) { return c + b * std::abs(x); }, std::abs(b));
}

struct Simulation {
  PathBundle bundle;
  std::optional<ReflectedBundle> reflected;
};

Simulation simulate(const Settings& s, std::size_t threads, const LevyMeasureModel& model,
                    const PolynomialBasis& basis) {
  SimulationOptions options;
  options.brownian = s.brownian;
  options.threads = threads;
  const auto grid = TimeGrid::make(s.t0, s.T, s.n_steps);
  Simulation sim{simulate_bundle(model, basis, grid, s.n_paths, s.seed, options), std::nullopt};
  if (s.state == StateKind::Reflected)
    sim.reflected = reflect_bundle(make_reflection(s), sim.bundle, s.x0, threads);
  IncreasingProcessSpec inc;
  switch (s.increasing) {
    case IncreasingKind::Zero: break;
    case IncreasingKind::Time: inc.source = IncreasingProcessSpec::Deterministic{[](double t) { return t; }}; break;
    case IncreasingKind::LocalTime: inc.source = IncreasingProcessSpec::Imported{sim.reflected->abs_eta}; break;
  }
  sim.bundle = attach_increasing_process(std::move(sim.bundle), inc);
  return sim;
}

SolverInput solver_input(const Settings& s, const Simulation& sim) {
  if (s.state == StateKind::Reflected) return make_solver_input(sim.bundle, &sim.reflected->x);
  if (s.x0 != 0.0) {
    NodeMatrix shifted = sim.bundle.levy();
    for (auto& v : shifted.values()) v += s.x0;
    return make_solver_input(sim.bundle, &shifted);
  }
  return make_solver_input(sim.bundle);
}

void print_ratios(std::ostream& out, const DiscreteSolution& sol) {
  out << "fixed_point_iterations = " << sol.iterations << "\n";
  out << "deltas =";
  for (double d : sol.deltas) out << " " << fmt(d);
  out << "\ncontraction_ratios =";
  for (double r : sol.contraction_ratios) out << " " << fmt(r);
  out << "\n";
}

int cmd_basis(Run& run) {
  const auto model = make_model(run.s);
  const auto basis = orthonormal_basis(model, run.s.m);
  auto out = open_output(run.dir / "basis.csv");
  CsvWriter csv(out);
  std::vector<std::string> header{"i", "degenerate"};
  for (int k = 1; k <= basis.size(); ++k) header.push_back("c_" + std::to_string(k));
  csv.header(header);
  double worst = 0.0;
  for (int i = 1; i <= basis.size(); ++i) {
    csv.field(i).field(basis.degenerate(i) ? 1 : 0);
    for (int k = 1; k <= basis.size(); ++k) csv.field(k <= i ? basis.coeff(i, k) : 0.0);
    csv.end_row();
    for (int j = 1; j <= basis.size(); ++j) {
      if (basis.degenerate(i) || basis.degenerate(j)) continue;
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(inner_product(model, basis.q(i), basis.q(j)) - target));
    }
  }
  run.summary << "m = " << basis.size() << "\neffective_dim = " << basis.effective_dim()
              << "\northonormality_max_error = " << fmt(worst) << "\n";
  return kExitOk;
}

int cmd_simulate(Run& run) {
  const auto model = make_model(run.s);
  const auto basis = orthonormal_basis(model, run.s.m);
  const auto sim = simulate(run.s, run.threads, model, basis);
  auto out = open_output(run.dir / "paths.csv");
  write_paths_csv(out, sim.bundle, run.s.max_paths);
  const auto& h1 = sim.bundle.teugels(1);
  const auto last = h1.row(h1.nodes() - 1);
  double mean = 0.0;
  for (double v : last) mean += v;
  mean /= static_cast<double>(last.size());
  run.summary << "paths = " << sim.bundle.n_paths() << "\nsteps = " << sim.bundle.grid().n_steps
              << "\ntotal_jumps = " << sim.bundle.total_jumps() << "\nmean_H1_T = " << fmt(mean) << "\n";
  return kExitOk;
}

int cmd_reflect(Run& run) {
  if (run.s.state != StateKind::Reflected)
    throw ValidationError("reflect needs problem.state = reflected (config key 'problem.state')");
  const auto model = make_model(run.s);
  const auto basis = orthonormal_basis(model, run.s.m);
  const auto sim = simulate(run.s, run.threads, model, basis);
  const auto& rb = *sim.reflected;
  const auto grid = sim.bundle.grid();
  auto out = open_output(run.dir / "reflected.csv");
  CsvWriter csv(out);
  csv.header({"path_id", "node_index", "t", "L", "X", "eta", "abs_eta"});
  const std::size_t n_dump = std::min(run.s.max_paths, sim.bundle.n_paths());
  for (std::size_t p = 0; p < n_dump; ++p)
    for (int i = 0; i < grid.n_nodes(); ++i) {
      const auto n = static_cast<std::size_t>(i);
      csv.field(p).field(i).field(grid.node(i)).field(sim.bundle.levy()(n, p)).field(rb.x(n, p));
      csv.field(rb.eta(n, p)).field(rb.abs_eta(n, p));
      csv.end_row();
    }
  const auto inv = validate_invariance(make_reflection(run.s), model);
  double mean_local_time = 0.0;
  const auto last = rb.abs_eta.row(rb.abs_eta.nodes() - 1);
  for (double v : last) mean_local_time += v;
  mean_local_time /= static_cast<double>(last.size());
  run.summary << "invariance_ok = " << (inv.ok ? "true" : "false") << "\ninvariance_worst_violation = "
              << fmt(inv.worst_violation) << "\nlarge_jump_exits = " << rb.large_jump_exits
              << "\nmean_abs_eta_T = " << fmt(mean_local_time) << "\n";
  return kExitOk;
}

DiscreteSolution solve_configured(Run& run, SolverInput* input_out = nullptr) {
  const auto model = make_model(run.s);
  const auto basis = orthonormal_basis(model, run.s.m);
  const auto sim = simulate(run.s, run.threads, model, basis);
  auto input = solver_input(run.s, sim);
  auto sol = fixed_point_solve(run.s.problem(), input, run.s.scheme, run.s.basis, run.s.fixed_point, run.threads);
  if (input_out) *input_out = std::move(input);
  return sol;
}

void write_solution_outputs(Run& run, const DiscreteSolution& sol) {
  {
    auto out = open_output(run.dir / "solution_report.csv");
    write_solution_report(out, sol);
  }
  if (run.s.write_solution) {
    auto out = open_output(run.dir / "solution.csv");
    write_solution_csv(out, sol, run.s.max_paths);
  }
  const auto last = sol.K.row(sol.K.nodes() - 1);
  double k_t = 0.0;
  for (double v : last) k_t += v;
  k_t /= static_cast<double>(last.size());
  double worst_skorokhod = 0.0;
  for (double r : skorokhod_residuals(sol)) worst_skorokhod = std::max(worst_skorokhod, std::abs(r));
  run.summary << "scheme = " << scheme_name(sol.scheme) << "\nn_penalty = " << fmt(sol.n_penalty)
              << "\nY_0 = " << fmt(sol.mean_y(0)) << "\nY_0_stderr = " << fmt(sol.y0_stderr)
              << "\nmean_K_T = " << fmt(k_t) << "\nskorokhod_worst = " << fmt(worst_skorokhod) << "\n";
  print_ratios(run.summary, sol);
}

int cmd_solve(Run& run) {
  const auto sol = solve_configured(run);
  write_solution_outputs(run, sol);
  return kExitOk;
}

int cmd_sweep(Run& run) {
  const auto model = make_model(run.s);
  const auto basis = orthonormal_basis(model, run.s.m);
  const auto sim = simulate(run.s, run.threads, model, basis);
  const auto input = solver_input(run.s, sim);
  const auto sweep = penalization_sweep(run.s.problem(), input, run.s.basis, run.s.n_list, run.s.fixed_point,
                                        run.threads);
  auto out = open_output(run.dir / "sweep.csv");
  CsvWriter csv(out);
  csv.header({"n", "Y_0", "K_T", "skorokhod", "gap_to_direct", "cauchy", "monotone_violation", "a_priori",
              "iterations"});
  for (const auto& r : sweep.rows) {
    csv.field(r.n).field(r.y0).field(r.k_T).field(r.skorokhod).field(r.gap_to_direct).field(r.cauchy);
    csv.field(r.monotone_violation).field(r.a_priori).field(r.iterations);
    csv.end_row();
  }
  run.summary << "rows = " << sweep.rows.size() << "\ndirect_Y_0 = " << fmt(sweep.direct_y0)
              << "\ny0_nondecreasing = " << (sweep.y0_nondecreasing ? "true" : "false")
              << "\ngap_decreasing = " << (sweep.gap_decreasing ? "true" : "false") << "\n";
  return kExitOk;
}

int cmd_verify(Run& run, const std::string& solution_path, std::ostream& err) {
  DiscreteSolution sol;
  if (!solution_path.empty()) {
    std::ifstream in(solution_path, std::ios::binary);
    if (!in) throw ValidationError("cannot read solution file '" + solution_path + "'");
    sol = read_solution_csv(in, run.s.scheme.kind, run.s.scheme.n_penalty);
    run.summary << "solution_file = " << solution_path << "\n";
  } else {
    sol = solve_configured(run);
    run.summary << "Y_0 = " << fmt(sol.mean_y(0)) << "\n";
  }
  const auto report = property_suite(sol);
  write_text(run.dir / "verification.json", report.to_json());
  write_text(run.dir / "verification.txt", report.to_text());
  run.summary << report.to_text();
  if (report.all_pass()) return kExitOk;
  for (const auto& r : report.results)
    if (!r.pass) err << "property failed: " << r.name << " (worst " << fmt(r.worst) << ", tolerance " << fmt(r.tolerance) << ")\n";
  return kExitPropertySuite;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n == 1) return {b};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = k == n - 1 ? b : a + (b - a) * k / (n - 1);
  return v;
}

int cmd_surface(Run& run) {
  const auto problem = markovian_problem(run.s);
  const auto config = surface_config(run.s, run.threads);
  const auto surface = estimate_surface(problem, config);
  auto out = open_output(run.dir / "surface.csv");
  write_surface_csv(out, surface);
  double worst_neumann = 0.0;
  for (const auto& pt : surface.points)
    if (std::isfinite(pt.neumann_residual)) worst_neumann = std::max(worst_neumann, std::abs(pt.neumann_residual));
  run.summary << "points = " << surface.points.size() << "\nu_t0_x0 = "
              << fmt(surface.at(0, surface.x_grid.size() / 2).u) << "\nneumann_worst = " << fmt(worst_neumann) << "\n";
  return kExitOk;
}

int cmd_example_poisson(Run& run) {
  const auto& s = run.s;
  const auto config = poisson_example_config(s, run.threads);
  const auto rep = example_poisson(config);

  nlohmann::ordered_json j;
  j["effective_dim"] = rep.effective_dim;
  j["higher_martingales_zero"] = rep.higher_martingales_zero;
  j["h1_max_dev"] = rep.h1_max_dev;
  j["beta_form_max_dev"] = rep.beta_form_max_dev;
  j["solver_max_diff"] = rep.solver_max_diff;
  j["y0_generic"] = rep.y0_generic;
  j["y0_specialized"] = rep.y0_specialized;
  j["iterations_generic"] = rep.iterations_generic;
  j["iterations_specialized"] = rep.iterations_specialized;
  j["a_prime"] = rep.a_prime;
  write_text(run.dir / "poisson_report.json", j.dump(2) + "\n");
  for (const auto& [key, value] : j.items()) run.summary << key << " = " << value.dump() << "\n";
  return kExitOk;
}

std::string manifest_text(const Options& opt, const Config& config, std::size_t threads, int exit_code) {
  std::ostringstream m;
  m << "# levybsde run manifest\n";
  m << "subcommand = " << opt.subcommand << "\n";
  m << "version = " << kVersion << "\n";
  m << "compiler = " << __VERSION__ << "\n";
  m << "kernels = " << kernels::backend_name(kernels::active_backend()) << "\n";
  m << "threads = " << threads << "\n";
  m << "seed = " << config.get("monte_carlo.seed") << "\n";
  m << "config_file = " << (opt.config_path.empty() ? "-" : opt.config_path) << "\n";
  for (const auto& o : opt.overrides) m << "override = " << o << "\n";
  m << "exit_code = " << exit_code << "\n\n";
  m << config.serialize();
  return m.str();
}

Config assemble_config(const Options& opt) {
  std::string file_text;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file '" + opt.config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    file_text = buf.str();
  }
  auto probe = Config::defaults();
  probe.load_text(file_text, opt.config_path);
  for (const auto& o : opt.overrides) probe.apply_override(o);
  std::string scenario = opt.scenario.empty() ? probe.get("problem.scenario") : opt.scenario;

  auto config = scenario == "custom" ? Config::defaults() : scenario_config(scenario);
  config.load_text(file_text, opt.config_path);
  for (const auto& o : opt.overrides) config.apply_override(o);
  config.set("problem.scenario", scenario);
  if (opt.seed) config.set("monte_carlo.seed", std::to_string(*opt.seed));
  if (!opt.out_dir.empty()) config.set("outputs.dir", opt.out_dir);
  return config;
}

int dispatch(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.subcommand == "scenarios") {
    for (const auto& s : scenario_catalogue()) out << s.name << "  " << s.description << "\n";
    return kExitOk;
  }

  std::optional<Config> config;
  Run run;
  run.threads = opt.threads;
  int code = kExitOk;
  try {
    config = assemble_config(opt);
    run.dir = config->get("outputs.dir");
    fs::create_directories(run.dir);
    run.s = Settings::from(*config);
    if (opt.subcommand == "basis") code = cmd_basis(run);
    else if (opt.subcommand == "simulate") code = cmd_simulate(run);
    else if (opt.subcommand == "reflect") code = cmd_reflect(run);
    else if (opt.subcommand == "solve") code = cmd_solve(run);
    else if (opt.subcommand == "sweep") code = cmd_sweep(run);
    else if (opt.subcommand == "verify") code = cmd_verify(run, opt.solution_path, err);
    else if (opt.subcommand == "surface") code = cmd_surface(run);
    else if (opt.subcommand == "example-poisson") code = cmd_example_poisson(run);
    else throw ValidationError("unknown subcommand '" + opt.subcommand + "'");
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    code = kExitValidation;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    code = kExitSolver;
  } catch (const fs::filesystem_error& e) {
    err << "validation error: " << e.what() << " (config key 'outputs.dir')\n";
    code = kExitValidation;
  }

  if (!run.dir.empty()) {
    try {
      write_text(run.dir / "manifest.txt", manifest_text(opt, *config, run.threads, code));
      if (code == kExitOk || code == kExitPropertySuite) write_text(run.dir / "summary.txt", run.summary.str());
    } catch (const std::exception& e) {
      err << "could not write manifest: " << e.what() << "\n";
      if (code == kExitOk) code = kExitValidation;
    }
  }
  out << run.summary.str();
  return code;
}

}  // namespace

MarkovianProblem markovian_problem(const Settings& s) {
  if (s.state != StateKind::Reflected)
    throw ValidationError("surface needs problem.state = reflected (config key 'problem.state')");
  MarkovianProblem problem;
  const auto p = s.problem();
  problem.l = p.obstacle.xi;
  problem.coeffs = p.coeffs;
  problem.h = p.obstacle.S;
  problem.reflection = make_reflection(s);
  problem.model = make_model(s);
  problem.m = s.m;
  return problem;
}

SurfaceConfig surface_config(const Settings& s, std::size_t threads) {
  SurfaceConfig config;
  config.T = s.T;
  config.t_grid = linspace(s.t0, s.T, s.surface_t_points);
  config.x_grid = linspace(-s.theta, s.theta, s.surface_x_points);
  config.dt = (s.T - s.t0) / s.n_steps;
  config.n_paths = s.n_paths;
  config.seed = s.seed;
  config.basis = s.basis;
  config.scheme = s.scheme;
  config.fixed_point = s.fixed_point;
  config.threads = threads;
  return config;
}

PoissonExampleConfig poisson_example_config(const Settings& s, std::size_t threads) {
  if (s.atoms.size() != 1)
    throw ValidationError("example-poisson needs a single atom (config key 'model.atoms')");
  if (s.sigma0 != 0.0) throw ValidationError("example-poisson needs model.sigma0 = 0 (config key 'model.sigma0')");
  if (s.t0 != 0.0) throw ValidationError("example-poisson needs grid.t0 = 0 (config key 'grid.t0')");
  const auto p = s.problem();
  PoissonExampleConfig config;
  config.alpha = s.atoms[0].rate;
  config.beta = s.atoms[0].size;
  config.a = s.drift + config.alpha * config.beta;
  config.m = s.m;
  config.T = s.T;
  config.n_steps = s.n_steps;
  config.n_paths = s.n_paths;
  config.seed = s.seed;
  config.x0 = s.x0;
  config.theta = s.theta;
  const double c = s.sigma_c, b = s.sigma_abs;
  config.sigma = [c, b](double x) { return c + b * std::abs(x); };
  config.sigma_lipschitz = std::abs(b);
  config.l = p.obstacle.xi;
  config.coeffs = p.coeffs;
  config.h = p.obstacle.S;
  config.basis = s.basis;
  config.scheme = s.scheme;
  config.fixed_point = s.fixed_point;
  config.threads = threads;
  return config;
}

SolverInput prepare_input(const Settings& settings, std::size_t threads) {
  const auto model = make_model(settings);
  const auto basis = orthonormal_basis(model, settings.m);
  return solver_input(settings, simulate(settings, threads, model, basis));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo solver for reflected generalized backward doubly stochastic equations driven by Lévy processes",
               "levybsde"};
  app.fallthrough();
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  app.add_option("--config", opt.config_path, "Config file (sectioned key = value)");
  app.add_option("--scenario", opt.scenario, "Built-in scenario used as the base config");
  app.add_option("--set", opt.overrides, "Override, e.g. --set solver.degree=3 (repeatable)")->take_all();
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides monte_carlo.seed)");
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  app.add_option("--out", opt.out_dir, "Output directory (overrides outputs.dir)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"basis", "Orthonormal Teugels coefficients"},
      {"simulate", "Lévy, power-jump and Teugels paths"},
      {"reflect", "Reflected forward process on [-theta, theta]"},
      {"solve", "Backward solve with the fixed-point iteration"},
      {"sweep", "Penalization sweep over solver.n_list"},
      {"verify", "Property suite on a solve or on --solution FILE"},
      {"surface", "Surface u(t, x) from pointwise solves"},
      {"example-poisson", "Single-atom reduction check"},
      {"scenarios", "List the built-in scenarios"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "verify") sub->add_option("--solution", opt.solution_path, "Solution CSV to check instead of solving");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (seed_opt->count() > 0) opt.seed = seed;
  for (auto* sub : app.get_subcommands()) opt.subcommand = sub->get_name();
  return dispatch(opt, out, err);
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace levybsde::cli
