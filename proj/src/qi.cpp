#include <chrono>
#include <cmath>
#include <numeric>

#include "qtune/agents.hpp"
#include "qtune/error.hpp"
#include "qtune/log.hpp"
#include "qtune/qtable.hpp"

namespace qtune {

OptimizeResult qi_optimize(const Surface& surface, const QiConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  if (cfg.trials == 0) throw ArgumentError("qi_optimize: trials must be at least 1");
  if (!(cfg.change_threshold >= 0.0)) throw ArgumentError("qi_optimize: change threshold must be >= 0");
  validate_policy(cfg.policy);

  const auto& space = surface.space();
  const auto start = Clock::now();
  Rng agent_rng(derive_seed(cfg.seed, Stream::kAgent));
  Rng policy_rng(derive_seed(cfg.seed, Stream::kPolicy));

  const auto actions = space.single_dim_actions();
  std::vector<QTable::ActionKey> action_keys(actions.size());
  std::iota(action_keys.begin(), action_keys.end(), QTable::ActionKey{0});
  QTable table;

  // One evaluation for the random seed configuration plus one per trial.
  CountingEvaluator eval(surface, cfg.trials + 1);
  const auto seed_k = agent_rng.uniform_index(static_cast<std::size_t>(space.cardinality()));
  QiState incumbent{space.config_from_flat_index(seed_k), 0.0};
  incumbent.metric = eval.score(incumbent.config);

  OptimizeResult result;
  result.budget = cfg.trials;
  bool warned_zero = false;
  std::vector<double> q(actions.size());
  std::uint64_t n = 0;
  std::uint64_t episode = 0;

  while (n < cfg.trials) {
    QiState s = incumbent;
    std::uint64_t s_key = space.flat_index(s.config);
    double cum = 0.0;
    for (std::uint64_t step = 0;; ++step) {
      for (std::size_t a = 0; a < actions.size(); ++a) q[a] = table.get(s_key, a);
      const std::size_t a = select(cfg.policy, q, policy_rng);
      QiState next = qi_apply(s, actions[a], eval);
      const std::uint64_t next_key = space.flat_index(next.config);
      const double r = qi_reward(s, next);
      tabular_update(table, s_key, a, r, next_key, action_keys, cfg.alpha, cfg.gamma);
      const double c = qi_change(s, next);
      if (std::isinf(c) && !warned_zero) {
        log_warning("qi_optimize: incumbent metric is 0, change ratio treated as infinite");
        warned_zero = true;
      }
      if (next.metric > incumbent.metric) incumbent = next;
      cum += r;
      result.trace.records.push_back(
          {episode, step, next_key, r, cum, incumbent.metric,
           std::chrono::duration<double, std::milli>(Clock::now() - start).count()});
      s = std::move(next);
      s_key = next_key;
      ++n;
      const bool changed = c > cfg.change_threshold;
      const bool stop = cfg.break_rule == QiBreakRule::kOnChange ? changed : !changed;
      if (stop || n >= cfg.trials) break;
    }
    ++episode;
  }

  result.best_config = incumbent.config;
  result.best_metric = incumbent.metric;
  result.evaluations = eval.used() - 1;
  return result;
}

}  // namespace qtune
