#include <chrono>
#include <cmath>

#include "qtune/agents.hpp"
#include "qtune/error.hpp"

namespace qtune {
namespace {

using Clock = std::chrono::steady_clock;

// Runs one episode from the all-zero initial state. `on_step` sees every
// experience right after it happens and may train `network` in place.
template <typename OnStep>
EpisodeOutcome run_episode(const QNetwork& network, const ActionTable& actions,
                           const Surface& surface, const MetaFeatures& metafeatures,
                           const PolicyConfig& policy, std::uint64_t max_actions, Rng& rng,
                           OnStep&& on_step) {
  const auto& space = surface.space();
  HypRLState state = hyprl_initial_state(metafeatures, space);
  std::vector<double> state_vec = state.to_vector();
  EpisodeBudget budget{max_actions, 0};
  EpisodeOutcome outcome;

  while (!hyprl_terminal(outcome.actions, budget)) {
    const auto q = network.predict_all(state_vec, actions);
    const std::uint64_t a = select(policy, q, rng);
    const Configuration config = space.config_from_flat_index(a);
    const double r = hyprl_reward(surface, config);
    HypRLState next = hyprl_transition(state, space, config, r);
    outcome.actions.push_back(a);
    outcome.rewards.push_back(r);
    ++budget.actions_taken;
    const bool terminal = hyprl_terminal(outcome.actions, budget);

    std::vector<double> next_vec = next.to_vector();
    on_step(Experience{state_vec, next_vec, a, r, terminal});
    state = std::move(next);
    state_vec = std::move(next_vec);
  }
  const auto n = outcome.actions.size();
  outcome.ended_on_repeat = n >= 2 && outcome.actions[n - 1] == outcome.actions[n - 2];
  return outcome;
}

}  // namespace

void HypRLConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("hyprl: gamma must lie in [0, 1)");
  if (target_update_every == 0) throw ArgumentError("hyprl: target_update_every must be positive");
  if (buffer_capacity == 0) throw ArgumentError("hyprl: buffer_capacity must be positive");
  if (episodes_per_dataset == 0) throw ArgumentError("hyprl: episodes_per_dataset must be positive");
  if (actions_per_episode == 0) throw ArgumentError("hyprl: actions_per_episode must be positive");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ArgumentError("hyprl: epsilon must lie in [0, 1]");
  }
  if (softmax_temperature && !(*softmax_temperature > 0.0)) {
    throw ArgumentError("hyprl: softmax temperature must be positive");
  }
  if (minibatch_size == 0) throw ArgumentError("hyprl: minibatch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("hyprl: learning_rate must be positive");
  }
}

HypRLTrainResult hyprl_train(std::span<const TrainingSurface> surfaces, const HypRLConfig& cfg) {
  if (surfaces.empty()) throw ArgumentError("hyprl_train: no training surfaces");
  cfg.validate();
  const SearchSpace& space = surfaces.front().surface.space();
  for (const auto& ts : surfaces) {
    if (!(ts.surface.space() == space)) {
      throw ArgumentError("hyprl_train: all training surfaces must share one search space");
    }
  }

  const auto start = Clock::now();
  const ActionTable actions(space);
  QNetworkOptions net_options = cfg.network;
  net_options.seed = derive_seed(cfg.seed, Stream::kNetwork);
  QNetwork network(space.encoded_width(), net_options);
  Rng agent_rng(derive_seed(cfg.seed, Stream::kAgent));
  Rng policy_rng(derive_seed(cfg.seed, Stream::kPolicy));
  ReplayBuffer<Experience> buffer(cfg.buffer_capacity);
  const LinearEpsilonSchedule schedule{cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_episodes};

  OptimizeResult search;
  search.budget = cfg.evaluation_budget(surfaces.size());
  std::uint64_t best_action = 0;
  double best = -1.0;
  std::uint64_t global_step = 0;
  std::vector<TrainingExample> batch(cfg.minibatch_size);

  const std::uint64_t episodes = cfg.episodes_per_dataset * surfaces.size();
  for (std::uint64_t episode = 0; episode < episodes; ++episode) {
    const auto& ts = surfaces[agent_rng.uniform_index(surfaces.size())];
    PolicyConfig policy = EpsilonGreedy{cfg.epsilon_decay_episodes ? schedule.at(episode) : cfg.epsilon_start};
    if (cfg.softmax_temperature) policy = Softmax{*cfg.softmax_temperature};

    std::uint64_t step = 0;
    double cum = 0.0;
    auto on_step = [&](Experience exp) {
      if (search.evaluations >= search.budget) throw BudgetExceeded("hyprl_train: evaluation budget exhausted");
      ++search.evaluations;
      cum += exp.reward;
      if (exp.reward > best) {
        best = exp.reward;
        best_action = exp.action;
      }
      search.trace.records.push_back(
          {episode, step++, exp.action, exp.reward, cum, best,
           std::chrono::duration<double, std::milli>(Clock::now() - start).count()});

      buffer.push(std::move(exp));
      const auto idx = buffer.sample_indices(cfg.minibatch_size, agent_rng);
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const Experience& e = buffer[idx[b]];
        auto& ex = batch[b];
        ex.input = e.state;
        const auto enc = actions.encoding(e.action);
        ex.input.insert(ex.input.end(), enc.begin(), enc.end());
        ex.target = target_value(e.reward, cfg.gamma, e.next_state, actions, network, e.terminal);
      }
      network.train_minibatch(batch, cfg.learning_rate);
      if (++global_step % cfg.target_update_every == 0) network.sync_target();
    };
    run_episode(network, actions, ts.surface, ts.metafeatures, policy, cfg.actions_per_episode,
                policy_rng, on_step);
  }

  search.best_config = space.config_from_flat_index(best_action);
  search.best_metric = best;
  return HypRLTrainResult{std::move(network), std::move(search)};
}

EpisodeOutcome hyprl_rollout(const QNetwork& network, const Surface& surface,
                             const MetaFeatures& metafeatures, const PolicyConfig& policy,
                             std::uint64_t max_actions, Rng& rng) {
  if (max_actions == 0) throw ArgumentError("hyprl_rollout: max_actions must be positive");
  if (network.config_width() != surface.space().encoded_width()) {
    throw ArgumentError("hyprl_rollout: network layout does not match the search space");
  }
  const ActionTable actions(surface.space());
  return run_episode(network, actions, surface, metafeatures, policy, max_actions, rng,
                     [](const Experience&) {});
}

Configuration hyprl_find_optimal(const QNetwork& network, const MetaFeatures& metafeatures,
                                 const SearchSpace& space, std::uint64_t max_iters,
                                 const Surface* reward_surface) {
  if (max_iters == 0) throw ArgumentError("hyprl_find_optimal: max_iters must be positive");
  if (network.config_width() != space.encoded_width()) {
    throw ArgumentError("hyprl_find_optimal: network layout does not match the search space");
  }
  if (reward_surface && !(reward_surface->space() == space)) {
    throw ArgumentError("hyprl_find_optimal: reward surface is defined over a different space");
  }
  const ActionTable actions(space);
  HypRLState state = hyprl_initial_state(metafeatures, space);
  std::uint64_t chosen = 0;
  for (std::uint64_t i = 0; i < max_iters; ++i) {
    const auto q = network.predict_all(state.to_vector(), actions);
    const std::uint64_t a = argmax(q);
    if (i > 0 && a == chosen) break;
    chosen = a;
    const Configuration config = space.config_from_flat_index(a);
    const double r = reward_surface ? hyprl_reward(*reward_surface, config) : 0.0;
    state = hyprl_transition(state, space, config, r);
  }
  return space.config_from_flat_index(chosen);
}

}  // namespace qtune
