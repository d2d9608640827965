#include "relmarl/replay.hpp"

#include <string>

namespace relmarl {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
  ring_.reserve(capacity_ < 4096 ? capacity_ : 4096);
}

void ReplayMemory::push(Transition t) {
  if (t.state.size() != t.next_state.size() || t.joint_action.size() != t.rewards.size()) {
    throw std::invalid_argument("transition has inconsistent state or agent dimensions");
  }
  if (size_ > 0) {
    const Transition& ref = ring_.front();
    if (t.state.size() != ref.state.size() || t.rewards.size() != ref.rewards.size()) {
      throw std::invalid_argument("transition shape differs from stored transitions");
    }
  }
  if (size_ < capacity_) {
    ring_.push_back(std::move(t));
    ++size_;
    return;
  }
  ring_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayMemory::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index " + std::to_string(i) + " out of range");
  return ring_[(head_ + i) % capacity_];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t count, Rng& rng) const {
  if (size_ < count) {
    throw std::length_error("replay holds " + std::to_string(size_) + " transitions, batch needs " +
                            std::to_string(count));
  }
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = rng.uniform_index(size_);
  return idx;
}

std::vector<Transition> ReplayMemory::sample(std::size_t count, Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(count);
  for (std::size_t i : sample_indices(count, rng)) out.push_back((*this)[i]);
  return out;
}

}  // namespace relmarl
