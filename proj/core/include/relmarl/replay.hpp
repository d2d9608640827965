#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "relmarl/rng.hpp"

namespace relmarl {

/// One joint step: encoded state, each agent's action and individual
/// reward, the successor state and whether the episode ended there. The
/// per-agent rewards are kept so the team reward can be formed at training
/// time from whichever relational network is in use.
struct Transition {
  std::vector<double> state;
  std::vector<std::size_t> joint_action;
  std::vector<double> rewards;
  std::vector<double> next_state;
  bool terminal = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed-capacity FIFO of transitions with uniform sampling (with
/// replacement). The first push fixes the expected state and agent sizes.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);

  /// `count` independent uniform draws. Throws std::length_error when
  /// fewer than `count` transitions are stored.
  std::vector<Transition> sample(std::size_t count, Rng& rng) const;
  /// Same draws as sample(), returned as positions for operator[].
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

  /// i = 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::size_t size_ = 0;
};

}  // namespace relmarl
