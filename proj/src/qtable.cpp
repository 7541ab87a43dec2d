#include "qtune/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtune/error.hpp"
#include "qtune/random.hpp"

namespace qtune {

std::size_t QTable::KeyHash::operator()(const Key& k) const noexcept {
  return static_cast<std::size_t>(splitmix64(k.s ^ splitmix64(k.a)));
}

QTable::QTable(double default_value) : default_(default_value) {
  if (!std::isfinite(default_value)) throw ArgumentError("QTable default must be finite");
}

double QTable::get(StateKey s, ActionKey a) const {
  auto it = entries_.find(Key{s, a});
  return it == entries_.end() ? default_ : it->second;
}

void QTable::set(StateKey s, ActionKey a, double value) {
  if (!std::isfinite(value)) throw ArgumentError("QTable values must be finite");
  entries_[Key{s, a}] = value;
}

double QTable::max_value(StateKey s, std::span<const ActionKey> actions) const {
  if (actions.empty()) return 0.0;
  double best = get(s, actions.front());
  for (auto a : actions.subspan(1)) best = std::max(best, get(s, a));
  return best;
}

double tabular_update(QTable& table, QTable::StateKey s, QTable::ActionKey a, double reward,
                      QTable::StateKey s_next, std::span<const QTable::ActionKey> next_actions,
                      double alpha, double gamma) {
  if (!std::isfinite(reward) || !std::isfinite(alpha) || !std::isfinite(gamma)) {
    throw ArgumentError("tabular_update: non-finite input");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw ArgumentError("tabular_update: alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (gamma < 0.0 || gamma > 1.0) {
    throw ArgumentError("tabular_update: gamma must lie in [0, 1], got " + std::to_string(gamma));
  }
  const double q = table.get(s, a);
  const double next_max = table.max_value(s_next, next_actions);
  const double updated = q + alpha * (reward + gamma * next_max - q);
  table.set(s, a, updated);
  return updated;
}

}  // namespace qtune
