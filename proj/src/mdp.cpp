#include "qtune/mdp.hpp"

#include <cmath>
#include <limits>

#include "qtune/error.hpp"

namespace qtune {

std::vector<double> HypRLState::to_vector() const {
  std::vector<double> v;
  v.reserve(vector_size());
  v.insert(v.end(), metafeatures.values.begin(), metafeatures.values.end());
  v.insert(v.end(), encoded_config.begin(), encoded_config.end());
  v.push_back(cumulative_reward);
  return v;
}

HypRLState hyprl_initial_state(const MetaFeatures& mf, const SearchSpace& space) {
  return HypRLState{mf, std::vector<double>(space.encoded_width(), 0.0), 0.0};
}

double hyprl_reward(const Surface& surface, const Configuration& action_config) {
  return surface.score(action_config);
}

HypRLState hyprl_transition(const HypRLState& s, const SearchSpace& space,
                            const Configuration& action_config, double reward) {
  if (s.encoded_config.size() != space.encoded_width()) {
    throw SpaceError("state encoding width " + std::to_string(s.encoded_config.size()) +
                     " does not match space width " + std::to_string(space.encoded_width()));
  }
  return HypRLState{s.metafeatures, space.encode(action_config), s.cumulative_reward + reward};
}

bool hyprl_terminal(std::span<const std::uint64_t> history, const EpisodeBudget& budget) {
  if (budget.actions_taken >= budget.max_actions) return true;
  const auto n = history.size();
  return n >= 2 && history[n - 1] == history[n - 2];
}

QiState qi_initial_state(const Surface& surface, const Configuration& config) {
  return QiState{config, surface.score(config)};
}

double qi_reward(const QiState& prev, const QiState& next) { return next.metric - prev.metric; }

double qi_change(const QiState& prev, const QiState& next) {
  if (prev.metric == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(prev.metric - next.metric) / prev.metric;
}

QiState qi_apply(const QiState& state, const SingleDimAction& action, CountingEvaluator& evaluator) {
  Configuration next = evaluator.surface().space().apply(state.config, action);
  const double metric = evaluator.score(next);
  return QiState{std::move(next), metric};
}

}  // namespace qtune
