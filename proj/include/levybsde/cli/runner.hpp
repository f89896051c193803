#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "levybsde/cli/config.hpp"
#include "levybsde/solver.hpp"
#include "levybsde/spdie_bridge.hpp"

namespace levybsde::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitSolver = 2,
  kExitPropertySuite = 3,
};

/// Simulates the configured paths (and reflected state) and packs them for
/// the solver, exactly as the solve subcommand does.
SolverInput prepare_input(const Settings& settings, std::size_t threads = 1);

/// Markovian problem and surface grid of the surface subcommand.
MarkovianProblem markovian_problem(const Settings& settings);
SurfaceConfig surface_config(const Settings& settings, std::size_t threads = 1);

/// Single-atom example of the example-poisson subcommand.
PoissonExampleConfig poisson_example_config(const Settings& settings, std::size_t threads = 1);

/// In-process entry point; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace levybsde::cli
