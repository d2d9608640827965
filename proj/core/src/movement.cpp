#include "relmarl/env.hpp"

namespace relmarl {

Cell shifted(Cell c, std::size_t action) {
  switch (static_cast<Move>(action)) {
    case Move::up: return {c.col, c.row - 1};
    case Move::down: return {c.col, c.row + 1};
    case Move::left: return {c.col - 1, c.row};
    case Move::right: return {c.col + 1, c.row};
    case Move::stay: return c;
  }
  throw EnvError("action index out of range");
}

std::vector<Cell> resolve_moves(std::span<const Cell> current, std::span<const Cell> desired,
                                const std::vector<bool>& active) {
  const std::size_t n = current.size();
  if (desired.size() != n || active.size() != n) throw EnvError("resolve_moves: size mismatch");
  std::vector<Cell> target(desired.begin(), desired.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) target[i] = current[i];
  }
  auto moving = [&](std::size_t i) { return active[i] && target[i] != current[i]; };

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<bool> revert(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (!moving(i)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !active[j]) continue;
        const bool contested = target[i] == target[j];
        const bool swap = moving(j) && target[i] == current[j] && target[j] == current[i];
        if (contested || swap) revert[i] = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (revert[i]) {
        target[i] = current[i];
        changed = true;
      }
    }
  }
  return target;
}

}  // namespace relmarl
