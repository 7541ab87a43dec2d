#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "qtune/error.hpp"
#include "qtune/random.hpp"

namespace qtune {

// Bounded FIFO experience store. Pushing into a full buffer evicts the
// oldest entry.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ArgumentError("replay buffer capacity must be positive");
  }

  void push(T entry) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(entry));
  }

  // Uniform draws with replacement; one Rng::uniform_index call per draw.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (entries_.empty()) throw ArgumentError("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.uniform_index(entries_.size());
    return idx;
  }

  std::vector<T> sample(std::size_t n, Rng& rng) const {
    std::vector<T> out;
    out.reserve(n);
    for (auto i : sample_indices(n, rng)) out.push_back(entries_[i]);
    return out;
  }

  // Index 0 is the oldest entry.
  const T& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<T> entries_;
};

}  // namespace qtune
