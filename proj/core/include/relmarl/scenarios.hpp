#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "relmarl/env.hpp"
#include "relmarl/grid_world.hpp"
#include "relmarl/switch_world.hpp"

namespace relmarl {

struct ScenarioInfo {
  std::string name;
  std::size_t agents = 0;
  std::string description;
};

/// Every shipped scenario: rc, rc-rm, drc-rm, rc-bc, switch2, switch3, switch4.
std::vector<ScenarioInfo> scenario_catalog();

/// Throws std::invalid_argument for names outside the grid catalog.
GridScenario grid_scenario(std::string_view name);
/// Two to four agents: red and blue, plus green, plus yellow.
SwitchScenario switch_scenario(std::size_t agents);

/// Throws std::invalid_argument listing the valid names.
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace relmarl
