#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "levybsde/cli/config.hpp"

namespace levybsde::cli {

struct Scenario {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> settings;  // config key, value
};

const std::vector<Scenario>& scenario_catalogue();
const Scenario& find_scenario(std::string_view name);

/// Defaults overlaid with the scenario's settings.
Config scenario_config(std::string_view name);

}  // namespace levybsde::cli
