#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace relmarl {

/// The five per-agent actions shared by every environment.
enum class Move : std::size_t { up = 0, down = 1, left = 2, right = 3, stay = 4 };
inline constexpr std::size_t kActionCount = 5;

struct Cell {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Cell one step away in the direction of `action` (unchanged for stay).
Cell shifted(Cell c, std::size_t action);

inline int manhattan(Cell a, Cell b) {
  return (a.col > b.col ? a.col - b.col : b.col - a.col) + (a.row > b.row ? a.row - b.row : b.row - a.row);
}

/// Acting on a finished episode, or an invalid joint action.
class EnvError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct StepOutcome {
  std::vector<double> rewards;
  bool terminal = false;
};

/// Stateful wrapper around a deterministic simultaneous-move simulator.
/// Every agent observes the same encoded global state.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view scenario() const = 0;
  virtual std::size_t agent_count() const = 0;
  std::size_t action_count() const { return kActionCount; }
  virtual std::size_t observation_size() const = 0;
  virtual int max_steps() const = 0;

  virtual void reset() = 0;
  virtual StepOutcome step(std::span<const std::size_t> actions) = 0;
  virtual std::vector<double> observe() const = 0;
  virtual bool done() const = 0;
  virtual int time_step() const = 0;
  virtual std::vector<Cell> agent_cells() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// Resolves simultaneous one-cell moves among `current` positions.
///
/// Agents whose `active` flag is false take no part in collisions. A move
/// fails when two agents target the same cell, when two agents swap
/// cells, or when the target is held by an agent that ends up staying;
/// failures cascade until no conflicts remain. Returns final positions.
std::vector<Cell> resolve_moves(std::span<const Cell> current, std::span<const Cell> desired,
                                const std::vector<bool>& active);

}  // namespace relmarl
