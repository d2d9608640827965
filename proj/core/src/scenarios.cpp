#include "relmarl/scenarios.hpp"

#include <stdexcept>

namespace relmarl {
namespace {

std::string valid_names() {
  std::string out;
  for (const auto& s : scenario_catalog()) out += (out.empty() ? "" : ", ") + s.name;
  return out;
}

}  // namespace

std::vector<ScenarioInfo> scenario_catalog() {
  return {
      {"rc", 2, "one green resource, closer to red"},
      {"rc-rm", 2, "red moves vertically only; the green resource is off red's column"},
      {"drc-rm", 2, "red moves vertically only; one red and one blue resource"},
      {"rc-bc", 2, "battery limits 10 (red) and 5 (blue); one near and one far green resource"},
      {"switch2", 2, "bridge crossing, red and blue"},
      {"switch3", 3, "bridge crossing, red, blue and green"},
      {"switch4", 4, "bridge crossing, red, blue, green and yellow"},
  };
}

GridScenario grid_scenario(std::string_view name) {
  GridScenario s;
  s.name = std::string(name);
  if (name == "rc") {
    s.agents = {{{1, 1}}, {{3, 2}}};
    s.resources = {{{1, 2}, Color::green}};
  } else if (name == "rc-rm") {
    s.agents = {{{2, 0}, true}, {{0, 4}}};
    s.resources = {{{4, 2}, Color::green}};
  } else if (name == "drc-rm") {
    s.agents = {{{2, 0}, true}, {{0, 0}}};
    s.resources = {{{4, 2}, Color::red}, {{0, 4}, Color::blue}};
  } else if (name == "rc-bc") {
    s.agents = {{{0, 0}, false, 10}, {{1, 1}, false, 5}};
    s.resources = {{{2, 1}, Color::green}, {{4, 4}, Color::green}};
  } else {
    throw std::invalid_argument("unknown grid scenario '" + std::string(name) + "'");
  }
  return s;
}

SwitchScenario switch_scenario(std::size_t agents) {
  if (agents < 2 || agents > 4) throw std::invalid_argument("switch scenario supports 2 to 4 agents");
  SwitchScenario s;
  s.name = "switch" + std::to_string(agents);
  s.board = {
      "..###..",
      ".......",
      "..###..",
  };
  // red, blue, green, yellow; each heads for the far side of its own row
  const std::vector<Cell> starts{{0, 0}, {6, 0}, {0, 2}, {6, 2}};
  const std::vector<Cell> goals{{6, 0}, {0, 0}, {6, 2}, {0, 2}};
  s.starts.assign(starts.begin(), starts.begin() + static_cast<std::ptrdiff_t>(agents));
  s.goals.assign(goals.begin(), goals.begin() + static_cast<std::ptrdiff_t>(agents));
  return s;
}

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "switch2") return std::make_unique<SwitchEnvironment>(SwitchWorld(switch_scenario(2)));
  if (name == "switch3") return std::make_unique<SwitchEnvironment>(SwitchWorld(switch_scenario(3)));
  if (name == "switch4") return std::make_unique<SwitchEnvironment>(SwitchWorld(switch_scenario(4)));
  if (name == "rc" || name == "rc-rm" || name == "drc-rm" || name == "rc-bc") {
    return std::make_unique<GridEnvironment>(GridWorld(grid_scenario(name)));
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'; valid: " + valid_names());
}

}  // namespace relmarl
