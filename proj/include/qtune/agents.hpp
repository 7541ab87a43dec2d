#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qtune/bench.hpp"
#include "qtune/mdp.hpp"
#include "qtune/policy.hpp"
#include "qtune/qnetwork.hpp"
#include "qtune/replay_buffer.hpp"
#include "qtune/space.hpp"
#include "qtune/trace.hpp"

namespace qtune {

struct OptimizeResult {
  Configuration best_config;
  double best_metric = 0.0;  // maximize-form
  std::uint64_t evaluations = 0;
  std::uint64_t budget = 0;
  Trace trace;
};

// N uniform draws over flat indices, with replacement.
OptimizeResult random_search(const Surface& surface, std::uint64_t budget, std::uint64_t seed);

// Exhaustive scan in flat-index order; ties keep the lowest index.
OptimizeResult grid_search(const Surface& surface, std::uint64_t limit = kDeskScaleLimit);

// --- Tabular Q-learning over single-dimension moves ----------------------

enum class QiBreakRule {
  kOnChange,  // end the inner episode when the metric moves by more than the threshold
  kOnStable,  // inverted rule: end it when the metric moves by at most the threshold
};

struct QiConfig {
  std::uint64_t trials = 200;
  double alpha = 0.1;
  double gamma = 0.9;
  PolicyConfig policy = EpsilonGreedy{0.3};
  double change_threshold = 0.01;
  QiBreakRule break_rule = QiBreakRule::kOnChange;
  std::uint64_t seed = 0;
};

// The seed configuration is evaluated once outside the trial budget; the
// trace then holds exactly one record per trial.
OptimizeResult qi_optimize(const Surface& surface, const QiConfig& config);

// --- Hyp-RL ---------------------------------------------------------------

struct Experience {
  std::vector<double> state;
  std::vector<double> next_state;
  std::uint64_t action = 0;  // flat index
  double reward = 0.0;
  bool terminal = false;
};

struct TrainingSurface {
  Surface surface;
  MetaFeatures metafeatures;
};

struct HypRLConfig {
  double gamma = 0.9;
  std::uint64_t target_update_every = 10;
  std::uint64_t buffer_capacity = 1000;
  std::uint64_t episodes_per_dataset = 100;
  std::uint64_t actions_per_episode = 10;
  // Epsilon decays linearly over `epsilon_decay_episodes` episodes; 0 keeps
  // it at epsilon_start.
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t epsilon_decay_episodes = 0;
  // When set, softmax with this temperature replaces epsilon-greedy.
  std::optional<double> softmax_temperature;
  std::uint64_t minibatch_size = 32;
  double learning_rate = 1e-3;
  QNetworkOptions network;  // network.seed is ignored; derived from `seed`
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t evaluation_budget(std::size_t num_surfaces) const {
    return episodes_per_dataset * num_surfaces * actions_per_episode;
  }
};

struct HypRLTrainResult {
  QNetwork network;
  OptimizeResult search;  // best configuration seen while training
};

HypRLTrainResult hyprl_train(std::span<const TrainingSurface> surfaces, const HypRLConfig& config);

struct EpisodeOutcome {
  std::vector<std::uint64_t> actions;
  std::vector<double> rewards;
  bool ended_on_repeat = false;
};

// One episode with a frozen network. Used for inference-time rollouts and
// for checking termination behaviour.
EpisodeOutcome hyprl_rollout(const QNetwork& network, const Surface& surface,
                             const MetaFeatures& metafeatures, const PolicyConfig& policy,
                             std::uint64_t max_actions, Rng& rng);

// Greedy rollout: at each of at most `max_iters` steps pick the Q-argmax
// over the whole grid, move there, and stop once the same configuration is
// chosen twice in a row. The reward fed into the state comes from
// `reward_surface` when given, otherwise it is 0 (pure inference).
Configuration hyprl_find_optimal(const QNetwork& network, const MetaFeatures& metafeatures,
                                 const SearchSpace& space, std::uint64_t max_iters,
                                 const Surface* reward_surface = nullptr);

}  // namespace qtune
