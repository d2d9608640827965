#include "relmarl/switch_world.hpp"

#include <algorithm>
#include <string>

namespace relmarl {

SwitchWorld::SwitchWorld(SwitchScenario scenario) : scenario_(std::move(scenario)) {
  if (scenario_.board.empty() || scenario_.board.front().empty()) throw std::invalid_argument("switch board is empty");
  for (const auto& row : scenario_.board) {
    if (row.size() != scenario_.board.front().size()) throw std::invalid_argument("switch board rows differ in length");
  }
  const std::size_t n = scenario_.starts.size();
  if (n == 0 || n > 4 || scenario_.goals.size() != n) {
    throw std::invalid_argument("switch scenario needs 1-4 agents, each with a goal");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_open(scenario_.starts[i]) || !is_open(scenario_.goals[i])) {
      throw std::invalid_argument("switch start or goal on a wall");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (scenario_.starts[i] == scenario_.starts[j]) throw std::invalid_argument("switch agents share a start");
    }
  }
}

bool SwitchWorld::is_open(Cell c) const {
  return c.row >= 0 && c.col >= 0 && c.row < rows() && c.col < cols() &&
         scenario_.board[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] != '#';
}

SwitchState SwitchWorld::initial_state() const {
  SwitchState s;
  s.agents = scenario_.starts;
  s.reached.assign(agent_count(), false);
  s.arrival_step.assign(agent_count(), -1);
  for (std::size_t i = 0; i < agent_count(); ++i) {
    if (s.agents[i] == scenario_.goals[i]) {
      s.reached[i] = true;
      s.arrival_step[i] = 0;
    }
  }
  return s;
}

bool SwitchWorld::is_terminal(const SwitchState& state) const {
  return state.t >= scenario_.max_steps || std::all_of(state.reached.begin(), state.reached.end(), [](bool r) { return r; });
}

SwitchStepResult SwitchWorld::step(const SwitchState& state, std::span<const std::size_t> actions) const {
  const std::size_t n = agent_count();
  if (actions.size() != n) throw EnvError("switch step: expected " + std::to_string(n) + " actions");
  for (std::size_t a : actions) {
    if (a >= kActionCount) throw EnvError("switch step: action index " + std::to_string(a) + " out of range");
  }
  if (is_terminal(state)) throw EnvError("switch step: episode already terminal");

  SwitchStepResult result;
  result.state = state;
  SwitchState& next = result.state;
  result.rewards.assign(n, 0.0);

  std::vector<bool> active(n);
  std::vector<Cell> desired(state.agents);
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = !state.reached[i];
    if (!active[i]) continue;
    const Cell dest = shifted(state.agents[i], actions[i]);
    if (is_open(dest)) desired[i] = dest;
  }
  next.agents = resolve_moves(state.agents, desired, active);
  ++next.t;

  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    result.rewards[i] = -scenario_.step_cost;
    if (next.agents[i] == scenario_.goals[i]) {
      next.reached[i] = true;
      next.arrival_step[i] = next.t;
      result.rewards[i] += scenario_.goal_reward;
    }
  }
  result.terminal = is_terminal(next);
  return result;
}

std::vector<double> SwitchWorld::encode(const SwitchState& state) const {
  std::vector<double> out;
  out.reserve(encoding_size());
  const double r = rows() - 1;
  const double c = cols() - 1;
  for (std::size_t i = 0; i < agent_count(); ++i) {
    out.push_back(state.agents[i].row / r);
    out.push_back(state.agents[i].col / c);
    out.push_back(state.reached[i] ? 1.0 : 0.0);
  }
  out.push_back(static_cast<double>(state.t) / scenario_.max_steps);
  return out;
}

SwitchEnvironment::SwitchEnvironment(SwitchWorld world) : world_(std::move(world)), state_(world_.initial_state()) {}

StepOutcome SwitchEnvironment::step(std::span<const std::size_t> actions) {
  SwitchStepResult r = world_.step(state_, actions);
  state_ = std::move(r.state);
  return {std::move(r.rewards), r.terminal};
}

}  // namespace relmarl
