#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>

namespace qtune {

// Sparse Q(s, a) store. Unseen pairs read as the default value and are not
// inserted by reads.
class QTable {
 public:
  using StateKey = std::uint64_t;
  using ActionKey = std::uint64_t;

  explicit QTable(double default_value = 0.0);

  double get(StateKey s, ActionKey a) const;
  void set(StateKey s, ActionKey a, double value);

  // max over `actions` of Q(s, a); 0 for an empty set.
  double max_value(StateKey s, std::span<const ActionKey> actions) const;

  std::size_t size() const { return entries_.size(); }
  double default_value() const { return default_; }

 private:
  struct Key {
    StateKey s;
    ActionKey a;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  double default_;
  std::unordered_map<Key, double, KeyHash> entries_;
};

// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
// An empty `next_actions` marks s' as terminal. Returns the stored value.
// Requires 0 <= alpha <= 1, 0 <= gamma <= 1 and finite inputs.
double tabular_update(QTable& table, QTable::StateKey s, QTable::ActionKey a, double reward,
                      QTable::StateKey s_next, std::span<const QTable::ActionKey> next_actions,
                      double alpha, double gamma);

}  // namespace qtune
