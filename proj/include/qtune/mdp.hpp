#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qtune/bench.hpp"
#include "qtune/space.hpp"

namespace qtune {

// Hyp-RL state: dataset metafeatures, encoding of the last chosen
// configuration, and the running sum of rewards.
struct HypRLState {
  MetaFeatures metafeatures;
  std::vector<double> encoded_config;
  double cumulative_reward = 0.0;

  // metafeatures ++ encoded_config ++ [cumulative_reward]
  std::vector<double> to_vector() const;
  std::size_t vector_size() const { return MetaFeatures::kSize + encoded_config.size() + 1; }

  bool operator==(const HypRLState&) const = default;
};

HypRLState hyprl_initial_state(const MetaFeatures& mf, const SearchSpace& space);

// Maximize-form metric of the chosen configuration, in [0, 1].
double hyprl_reward(const Surface& surface, const Configuration& action_config);

HypRLState hyprl_transition(const HypRLState& s, const SearchSpace& space,
                            const Configuration& action_config, double reward);

struct EpisodeBudget {
  std::uint64_t max_actions;
  std::uint64_t actions_taken = 0;
};

// Terminal when the budget is spent or the last two actions coincide.
// Actions are identified by flat index.
bool hyprl_terminal(std::span<const std::uint64_t> history, const EpisodeBudget& budget);

struct QiState {
  Configuration config;
  double metric = 0.0;  // maximize-form score of config
};

QiState qi_initial_state(const Surface& surface, const Configuration& config);

// next.metric - prev.metric; negative values are passed through.
double qi_reward(const QiState& prev, const QiState& next);

// |prev - next| / prev over metrics. prev.metric == 0 yields +infinity.
double qi_change(const QiState& prev, const QiState& next);

// Moves one dimension and re-evaluates through `evaluator`.
QiState qi_apply(const QiState& state, const SingleDimAction& action, CountingEvaluator& evaluator);

}  // namespace qtune
