#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relmarl/grid_world.hpp"
#include "relmarl/neural.hpp"

namespace oracle {

// Exhaustive max of the summed Q over every joint action; the argmax is
// the lexicographically smallest maximizing joint action.
inline std::pair<double, std::vector<std::size_t>> brute_force_joint(const std::vector<std::vector<double>>& q) {
  const std::size_t n = q.size();
  std::vector<std::size_t> joint(n, 0), best_joint;
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += q[i][joint[i]];
    if (total > best) {
      best = total;
      best_joint = joint;
    }
    std::size_t i = n;
    while (i > 0 && ++joint[i - 1] == q[i - 1].size()) joint[--i] = 0;
    if (i == 0) break;
  }
  return {best, best_joint};
}

// Naive dense forward pass: W stored input-major, ReLU on hidden layers.
inline std::vector<double> reference_forward(const relmarl::Mlp& net, const std::vector<double>& state) {
  std::vector<double> x = state;
  const auto layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    std::vector<double> y(l.outputs);
    for (std::size_t o = 0; o < l.outputs; ++o) {
      long double acc = l.bias[o];
      for (std::size_t i = 0; i < l.inputs; ++i) acc += static_cast<long double>(x[i]) * l.weights[i * l.outputs + o];
      y[o] = static_cast<double>(acc);
      if (k + 1 < layers.size()) y[o] = std::max(0.0, y[o]);
    }
    x = std::move(y);
  }
  return x;
}

// Breadth-first shortest path on a board of '.' (open) and '#' (wall),
// addressed as board[row][col].
inline std::optional<int> bfs_steps(const std::vector<std::string>& board, int col0, int row0, int col1, int row1) {
  const int rows = static_cast<int>(board.size());
  const int cols = static_cast<int>(board[0].size());
  std::vector<int> dist(static_cast<std::size_t>(rows * cols), -1);
  std::deque<std::pair<int, int>> frontier{{col0, row0}};
  dist[static_cast<std::size_t>(row0 * cols + col0)] = 0;
  const int dc[] = {0, 0, -1, 1};
  const int dr[] = {-1, 1, 0, 0};
  while (!frontier.empty()) {
    auto [c, r] = frontier.front();
    frontier.pop_front();
    if (c == col1 && r == row1) return dist[static_cast<std::size_t>(r * cols + c)];
    for (int k = 0; k < 4; ++k) {
      const int nc = c + dc[k], nr = r + dr[k];
      if (nc < 0 || nr < 0 || nc >= cols || nr >= rows || board[nr][nc] == '#') continue;
      auto& d = dist[static_cast<std::size_t>(nr * cols + nc)];
      if (d >= 0) continue;
      d = dist[static_cast<std::size_t>(r * cols + c)] + 1;
      frontier.emplace_back(nc, nr);
    }
  }
  return std::nullopt;
}

// Two-sided 95% Student-t critical values from printed tables, dof 1..9.
inline double t_table_95(std::size_t dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262};
  return table[dof - 1];
}

// Finite-horizon dynamic program over a grid world with deterministic
// dynamics. The optimal discounted team return from the initial state,
// optionally restricted to histories accepted by `allow` (a rejected
// transition is worth -infinity).
class GridPlanner {
 public:
  using TeamFn = std::function<double(const std::vector<double>&)>;
  using AllowFn = std::function<bool(const relmarl::GridStepResult&)>;

  GridPlanner(const relmarl::GridWorld& world, TeamFn team, double gamma, AllowFn allow = {})
      : world_(world), team_(std::move(team)), gamma_(gamma), allow_(std::move(allow)) {
    const std::size_t n = world_.agent_count();
    std::size_t count = 1;
    for (std::size_t i = 0; i < n; ++i) count *= relmarl::kActionCount;
    for (std::size_t j = 0; j < count; ++j) {
      std::vector<std::size_t> a(n);
      std::size_t rest = j;
      for (std::size_t i = n; i-- > 0;) {
        a[i] = rest % relmarl::kActionCount;
        rest /= relmarl::kActionCount;
      }
      joints_.push_back(std::move(a));
    }
  }

  double value(const relmarl::GridState& s) {
    if (world_.is_terminal(s)) return 0.0;
    const auto key = key_of(s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : joints_) best = std::max(best, q_value(s, a));
    memo_.emplace(key, best);
    return best;
  }

  double q_value(const relmarl::GridState& s, const std::vector<std::size_t>& a) {
    const auto res = world_.step(s, a);
    if (allow_ && !allow_(res)) return -std::numeric_limits<double>::infinity();
    const double r = team_(res.rewards);
    return res.terminal ? r : r + gamma_ * value(res.state);
  }

  // Greedy optimal rollout (lowest joint index among ties).
  std::vector<relmarl::GridStepResult> optimal_play() {
    std::vector<relmarl::GridStepResult> out;
    relmarl::GridState s = world_.initial_state();
    while (!world_.is_terminal(s)) {
      const double target = value(s);
      for (const auto& a : joints_) {
        if (q_value(s, a) == target) {
          out.push_back(world_.step(s, a));
          break;
        }
      }
      s = out.back().state;
    }
    return out;
  }

 private:
  std::vector<int> key_of(const relmarl::GridState& s) const {
    std::vector<int> k{s.t};
    for (const auto& c : s.agents) k.insert(k.end(), {c.col, c.row});
    k.insert(k.end(), s.consumer.begin(), s.consumer.end());
    k.insert(k.end(), s.battery.begin(), s.battery.end());
    return k;
  }

  const relmarl::GridWorld& world_;
  TeamFn team_;
  double gamma_;
  AllowFn allow_;
  std::vector<std::vector<std::size_t>> joints_;
  std::map<std::vector<int>, double> memo_;
};

}  // namespace oracle
