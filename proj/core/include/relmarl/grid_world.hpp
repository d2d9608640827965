#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relmarl/env.hpp"

namespace relmarl {

/// Agent and resource colors. Agent 0 is red, agent 1 is blue; a red or
/// blue resource can only be consumed by the agent of that color, a green
/// one by either.
enum class Color { red = 0, blue = 1, green = 2 };

struct GridAgentSpec {
  Cell start;
  bool vertical_only = false;
  int battery = -1;  ///< non-idle action budget per episode; -1 is unlimited
};

struct ResourceSpec {
  Cell cell;
  Color color = Color::green;
};

struct GridScenario {
  std::string name;
  int width = 5;
  int height = 5;
  int max_steps = 50;
  double consume_reward = 10.0;
  std::vector<GridAgentSpec> agents;
  std::vector<ResourceSpec> resources;
};

struct GridState {
  std::vector<Cell> agents;
  std::vector<int> consumer;        ///< per resource: consuming agent, or -1
  std::vector<int> consumed_count;  ///< per agent, at most 1
  std::vector<int> battery;         ///< per agent remaining budget, -1 unlimited
  int t = 0;

  bool consumed(std::size_t resource) const { return consumer[resource] >= 0; }
  std::size_t unconsumed() const;

  friend bool operator==(const GridState&, const GridState&) = default;
};

struct PushEvent {
  std::size_t pusher = 0;
  std::size_t pushed = 0;
  std::size_t action = 0;

  friend bool operator==(const PushEvent&, const PushEvent&) = default;
};

struct GridStepResult {
  GridState state;
  std::vector<double> rewards;
  bool terminal = false;
  std::vector<PushEvent> pushes;
};

/// Resource-collection grid world. Each step is resolved in a fixed order:
/// action constraints (vertical-only, battery), pushes, ordinary moves,
/// consumption, then the per-step penalty of one point per unconsumed
/// resource for every agent not standing on a resource cell.
class GridWorld {
 public:
  explicit GridWorld(GridScenario scenario);

  const GridScenario& scenario() const { return scenario_; }
  std::size_t agent_count() const { return scenario_.agents.size(); }
  bool has_batteries() const { return has_batteries_; }

  GridState initial_state() const;
  GridStepResult step(const GridState& state, std::span<const std::size_t> actions) const;
  bool is_terminal(const GridState& state) const;

  /// Layout: per agent (col/(w-1), row/(h-1)); per resource consumed flag;
  /// per agent battery fraction (only when some agent has a battery); per
  /// agent consumed-count flag.
  std::vector<double> encode(const GridState& state) const;
  std::size_t encoding_size() const;

  bool on_board(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < scenario_.width && c.row < scenario_.height; }
  bool is_resource_cell(Cell c) const;

 private:
  GridScenario scenario_;
  bool has_batteries_ = false;
};

class GridEnvironment final : public Environment {
 public:
  explicit GridEnvironment(GridWorld world);

  std::string_view scenario() const override { return world_.scenario().name; }
  std::size_t agent_count() const override { return world_.agent_count(); }
  std::size_t observation_size() const override { return world_.encoding_size(); }
  int max_steps() const override { return world_.scenario().max_steps; }

  void reset() override;
  StepOutcome step(std::span<const std::size_t> actions) override;
  std::vector<double> observe() const override { return world_.encode(state_); }
  bool done() const override { return world_.is_terminal(state_); }
  int time_step() const override { return state_.t; }
  std::vector<Cell> agent_cells() const override { return state_.agents; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<GridEnvironment>(*this); }

  const GridWorld& world() const { return world_; }
  const GridState& state() const { return state_; }
  const std::vector<PushEvent>& last_pushes() const { return last_pushes_; }

 private:
  GridWorld world_;
  GridState state_;
  std::vector<PushEvent> last_pushes_;
};

}  // namespace relmarl
