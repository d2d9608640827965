#include "relmarl/grid_world.hpp"

#include <algorithm>
#include <string>

namespace relmarl {
namespace {

bool may_consume(Color resource, std::size_t agent) {
  return resource == Color::green || static_cast<std::size_t>(resource) == agent;
}

}  // namespace

std::size_t GridState::unconsumed() const {
  return static_cast<std::size_t>(std::count(consumer.begin(), consumer.end(), -1));
}

GridWorld::GridWorld(GridScenario scenario) : scenario_(std::move(scenario)) {
  if (scenario_.agents.empty() || scenario_.agents.size() > 2) {
    throw std::invalid_argument("grid scenario '" + scenario_.name + "' must have one or two agents");
  }
  if (scenario_.resources.empty()) throw std::invalid_argument("grid scenario needs at least one resource");
  if (scenario_.max_steps <= 0) throw std::invalid_argument("grid scenario max_steps must be positive");
  for (std::size_t i = 0; i < scenario_.agents.size(); ++i) {
    const auto& a = scenario_.agents[i];
    if (!on_board(a.start)) throw std::invalid_argument("agent start off the board");
    if (a.battery >= 0) has_batteries_ = true;
    for (std::size_t j = 0; j < i; ++j) {
      if (scenario_.agents[j].start == a.start) throw std::invalid_argument("agents share a start cell");
    }
  }
  for (const auto& r : scenario_.resources) {
    if (!on_board(r.cell)) throw std::invalid_argument("resource off the board");
  }
}

bool GridWorld::is_resource_cell(Cell c) const {
  return std::any_of(scenario_.resources.begin(), scenario_.resources.end(),
                     [c](const ResourceSpec& r) { return r.cell == c; });
}

GridState GridWorld::initial_state() const {
  GridState s;
  for (const auto& a : scenario_.agents) {
    s.agents.push_back(a.start);
    s.battery.push_back(a.battery);
  }
  s.consumer.assign(scenario_.resources.size(), -1);
  s.consumed_count.assign(scenario_.agents.size(), 0);
  return s;
}

bool GridWorld::is_terminal(const GridState& state) const {
  return state.unconsumed() == 0 || state.t >= scenario_.max_steps;
}

GridStepResult GridWorld::step(const GridState& state, std::span<const std::size_t> actions) const {
  const std::size_t n = agent_count();
  if (actions.size() != n) throw EnvError("grid step: expected " + std::to_string(n) + " actions");
  for (std::size_t a : actions) {
    if (a >= kActionCount) throw EnvError("grid step: action index " + std::to_string(a) + " out of range");
  }
  if (is_terminal(state)) throw EnvError("grid step: episode already terminal");

  GridStepResult result;
  result.state = state;
  GridState& next = result.state;
  result.rewards.assign(n, 0.0);
  constexpr auto kStay = static_cast<std::size_t>(Move::stay);

  // 1. constraints
  std::vector<std::size_t> act(actions.begin(), actions.end());
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = static_cast<Move>(act[i]);
    if (scenario_.agents[i].vertical_only && (m == Move::left || m == Move::right)) act[i] = kStay;
    if (act[i] != kStay && next.battery[i] == 0) act[i] = kStay;
    if (act[i] != kStay && next.battery[i] > 0) --next.battery[i];
  }

  // 2. pushes: a mover pointing at an adjacent idle agent shoves it one cell
  const std::vector<Cell>& pos = state.agents;
  std::vector<Cell> desired(pos.begin(), pos.end());
  std::vector<int> pushed_by(n, -1);
  std::vector<int> push_hits(n, 0);
  std::vector<bool> resolved(n, false);
  for (std::size_t p = 0; p < n; ++p) {
    if (act[p] == kStay) continue;
    const Cell front = shifted(pos[p], act[p]);
    for (std::size_t q = 0; q < n; ++q) {
      if (q != p && pos[q] == front && act[q] == kStay) {
        pushed_by[q] = static_cast<int>(p);
        ++push_hits[q];
        resolved[p] = true;  // the pusher stays put whether or not the push lands
      }
    }
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (pushed_by[q] < 0) continue;
    resolved[q] = true;
    if (push_hits[q] > 1) continue;
    const Cell dest = shifted(pos[q], act[static_cast<std::size_t>(pushed_by[q])]);
    if (on_board(dest)) desired[q] = dest;
  }

  // 3. ordinary moves
  for (std::size_t i = 0; i < n; ++i) {
    if (resolved[i]) continue;
    const Cell dest = shifted(pos[i], act[i]);
    if (on_board(dest)) desired[i] = dest;
  }
  next.agents = resolve_moves(pos, desired, std::vector<bool>(n, true));
  for (std::size_t q = 0; q < n; ++q) {
    if (pushed_by[q] >= 0 && next.agents[q] != pos[q]) {
      const auto p = static_cast<std::size_t>(pushed_by[q]);
      result.pushes.push_back({p, q, act[p]});
    }
  }

  // 4. consumption
  for (std::size_t i = 0; i < n; ++i) {
    if (next.consumed_count[i] > 0) continue;
    for (std::size_t r = 0; r < scenario_.resources.size(); ++r) {
      const ResourceSpec& res = scenario_.resources[r];
      if (!next.consumed(r) && res.cell == next.agents[i] && may_consume(res.color, i)) {
        next.consumer[r] = static_cast<int>(i);
        next.consumed_count[i] = 1;
        result.rewards[i] += scenario_.consume_reward;
        break;
      }
    }
  }

  // 5. step penalty
  const std::size_t remaining = next.unconsumed();
  if (remaining > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_resource_cell(next.agents[i])) result.rewards[i] -= static_cast<double>(remaining);
    }
  }

  ++next.t;
  result.terminal = is_terminal(next);
  return result;
}

std::size_t GridWorld::encoding_size() const {
  const std::size_t n = agent_count();
  return 2 * n + scenario_.resources.size() + (has_batteries_ ? n : 0) + n;
}

std::vector<double> GridWorld::encode(const GridState& state) const {
  std::vector<double> out;
  out.reserve(encoding_size());
  const double w = scenario_.width - 1;
  const double h = scenario_.height - 1;
  for (const Cell& c : state.agents) {
    out.push_back(c.col / w);
    out.push_back(c.row / h);
  }
  for (std::size_t r = 0; r < scenario_.resources.size(); ++r) out.push_back(state.consumed(r) ? 1.0 : 0.0);
  if (has_batteries_) {
    for (std::size_t i = 0; i < agent_count(); ++i) {
      const int full = scenario_.agents[i].battery;
      out.push_back(full > 0 ? static_cast<double>(state.battery[i]) / full : 1.0);
    }
  }
  for (int count : state.consumed_count) out.push_back(count > 0 ? 1.0 : 0.0);
  return out;
}

GridEnvironment::GridEnvironment(GridWorld world) : world_(std::move(world)), state_(world_.initial_state()) {}

void GridEnvironment::reset() {
  state_ = world_.initial_state();
  last_pushes_.clear();
}

StepOutcome GridEnvironment::step(std::span<const std::size_t> actions) {
  GridStepResult r = world_.step(state_, actions);
  state_ = std::move(r.state);
  last_pushes_ = std::move(r.pushes);
  return {std::move(r.rewards), r.terminal};
}

}  // namespace relmarl
