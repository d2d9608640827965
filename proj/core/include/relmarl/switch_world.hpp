#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relmarl/env.hpp"

namespace relmarl {

/// Bridge-crossing world. `board` holds one string per row, '#' for wall
/// and '.' for open floor. Agents are indexed red, blue, green, yellow.
struct SwitchScenario {
  std::string name;
  std::vector<std::string> board;
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  int max_steps = 50;
  double goal_reward = 5.0;
  double step_cost = 0.1;
};

struct SwitchState {
  std::vector<Cell> agents;
  std::vector<bool> reached;
  std::vector<int> arrival_step;  ///< step count at arrival, -1 while travelling
  int t = 0;

  friend bool operator==(const SwitchState&, const SwitchState&) = default;
};

struct SwitchStepResult {
  SwitchState state;
  std::vector<double> rewards;
  bool terminal = false;
};

/// Simultaneous moves with the shared conflict rule; walls and the board
/// edge void a move. Every agent still travelling at the start of a step
/// pays the step cost for it; the step that lands an agent on its goal
/// also pays goal_reward, after which the agent leaves the board and
/// earns nothing further.
class SwitchWorld {
 public:
  explicit SwitchWorld(SwitchScenario scenario);

  const SwitchScenario& scenario() const { return scenario_; }
  std::size_t agent_count() const { return scenario_.starts.size(); }
  int rows() const { return static_cast<int>(scenario_.board.size()); }
  int cols() const { return static_cast<int>(scenario_.board.front().size()); }
  bool is_open(Cell c) const;

  SwitchState initial_state() const;
  SwitchStepResult step(const SwitchState& state, std::span<const std::size_t> actions) const;
  bool is_terminal(const SwitchState& state) const;

  /// Per agent (row/(rows-1), col/(cols-1), reached flag), then t/max_steps.
  std::vector<double> encode(const SwitchState& state) const;
  std::size_t encoding_size() const { return 3 * agent_count() + 1; }

 private:
  SwitchScenario scenario_;
};

class SwitchEnvironment final : public Environment {
 public:
  explicit SwitchEnvironment(SwitchWorld world);

  std::string_view scenario() const override { return world_.scenario().name; }
  std::size_t agent_count() const override { return world_.agent_count(); }
  std::size_t observation_size() const override { return world_.encoding_size(); }
  int max_steps() const override { return world_.scenario().max_steps; }

  void reset() override { state_ = world_.initial_state(); }
  StepOutcome step(std::span<const std::size_t> actions) override;
  std::vector<double> observe() const override { return world_.encode(state_); }
  bool done() const override { return world_.is_terminal(state_); }
  int time_step() const override { return state_.t; }
  std::vector<Cell> agent_cells() const override { return state_.agents; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<SwitchEnvironment>(*this); }

  const SwitchWorld& world() const { return world_; }
  const SwitchState& state() const { return state_; }

 private:
  SwitchWorld world_;
  SwitchState state_;
};

}  // namespace relmarl
