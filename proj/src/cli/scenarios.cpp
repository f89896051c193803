#include "levybsde/cli/scenarios.hpp"

#include "levybsde/errors.hpp"

namespace levybsde::cli {

const std::vector<Scenario>& scenario_catalogue() {
  static const std::vector<Scenario> catalogue = {
      {"constant-terminal",
       "xi = 1, f = phi = g = 0, no obstacle: Y = 1, Z = 0, K = 0 exactly",
       {{"problem.scenario", "constant-terminal"},
        {"model.atoms", "1:1,-1:1"},
        {"model.m", "2"},
        {"grid.n_steps", "50"},
        {"monte_carlo.n_paths", "500"},
        {"problem.xi_c", "1"}}},
      {"linear-ode",
       "xi = 1, f = -y on [0, 1]: Y_0 = exp(-1) up to the Euler error",
       {{"problem.scenario", "linear-ode"},
        {"grid.n_steps", "1000"},
        {"monte_carlo.n_paths", "200"},
        {"problem.xi_c", "1"},
        {"problem.f_y", "-1"}}},
      {"deterministic-obstacle",
       "xi = 0, frozen state, obstacle S = 1 - t/2 on [0, 2]: Y = S, no Monte Carlo noise",
       {{"problem.scenario", "deterministic-obstacle"},
        {"grid.T", "2"},
        {"grid.n_steps", "2000"},
        {"monte_carlo.n_paths", "200"},
        {"solver.n_penalty", "256"},
        {"solver.n_list", "1,2,4,8,16,32,64,128,256"},
        {"problem.state", "reflected"},
        {"problem.sigma_c", "0"},
        {"problem.obstacle", "quadratic"},
        {"problem.s_c", "1"},
        {"problem.s_t", "-0.5"}}},
      {"poisson-example",
       "single atom alpha = beta = 1, reflected X on [-1, 1] with sigma = 0.5 (1 - |x|), xi = x^2",
       {{"problem.scenario", "poisson-example"},
        {"model.atoms", "1:1"},
        {"model.drift", "-1"},
        {"model.m", "3"},
        {"monte_carlo.n_paths", "500"},
        {"solver.boundary_indicator", "true"},
        {"problem.state", "reflected"},
        {"problem.increasing", "local-time"},
        {"problem.sigma_c", "0.5"},
        {"problem.sigma_abs", "-0.5"},
        {"problem.xi_x2", "1"},
        {"problem.f_y", "-0.5"},
        {"problem.f_z", "0.2"},
        {"problem.g_y", "0.1"},
        {"problem.phi_y", "-1"},
        {"problem.lipschitz_c", "1"},
        {"problem.g_alpha", "0.5"}}},
      {"two-atom-demo",
       "atoms +-1 at rate 1, reflected X with sigma = 1 - |x|, xi = x^2, obstacle x^2 + 0.2 (1 - t)",
       {{"problem.scenario", "two-atom-demo"},
        {"model.atoms", "1:1,-1:1"},
        {"model.m", "2"},
        {"solver.boundary_indicator", "true"},
        {"problem.state", "reflected"},
        {"problem.increasing", "local-time"},
        {"problem.sigma_c", "1"},
        {"problem.sigma_abs", "-1"},
        {"problem.xi_x2", "1"},
        {"problem.f_y", "-0.5"},
        {"problem.phi_y", "-0.5"},
        {"problem.obstacle", "quadratic"},
        {"problem.s_c", "0.2"},
        {"problem.s_t", "-0.2"},
        {"problem.s_x2", "1"}}},
  };
  return catalogue;
}

const Scenario& find_scenario(std::string_view name) {
  for (const auto& s : scenario_catalogue())
    if (s.name == name) return s;
  throw ValidationError("unknown scenario '" + std::string(name) + "' (config key 'problem.scenario')");
}

Config scenario_config(std::string_view name) {
  auto config = Config::defaults();
  for (const auto& [key, value] : find_scenario(name).settings) config.set(key, value);
  return config;
}

}  // namespace levybsde::cli
