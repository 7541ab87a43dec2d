#include <chrono>

#include "qtune/agents.hpp"
#include "qtune/error.hpp"

namespace qtune {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

OptimizeResult random_search(const Surface& surface, std::uint64_t budget, std::uint64_t seed) {
  if (budget == 0) throw ArgumentError("random_search: budget must be at least 1");
  const auto& space = surface.space();
  const auto start = Clock::now();
  Rng rng(derive_seed(seed, Stream::kAgent));
  CountingEvaluator eval(surface, budget);

  OptimizeResult result;
  result.budget = budget;
  std::uint64_t best_k = 0;
  double best = -1.0;
  double cum = 0.0;
  for (std::uint64_t i = 0; i < budget; ++i) {
    const std::uint64_t k = rng.uniform_index(static_cast<std::size_t>(space.cardinality()));
    const double m = eval.score(space.config_from_flat_index(k));
    cum += m;
    if (m > best) {
      best = m;
      best_k = k;
    }
    result.trace.records.push_back({0, i, k, m, cum, best, ms_since(start)});
  }
  result.best_config = space.config_from_flat_index(best_k);
  result.best_metric = best;
  result.evaluations = eval.used();
  return result;
}

OptimizeResult grid_search(const Surface& surface, std::uint64_t limit) {
  const auto& space = surface.space();
  const std::uint64_t card = space.cardinality();
  if (card > limit) {
    throw SpaceError("grid_search refuses cardinality " + std::to_string(card) + " (limit " +
                     std::to_string(limit) + ")");
  }
  const auto start = Clock::now();
  CountingEvaluator eval(surface, card);

  OptimizeResult result;
  result.budget = card;
  result.trace.records.reserve(card);
  std::uint64_t best_k = 0;
  double best = -1.0;
  double cum = 0.0;
  for (std::uint64_t k = 0; k < card; ++k) {
    const double m = eval.score(space.config_from_flat_index(k));
    cum += m;
    if (m > best) {
      best = m;
      best_k = k;
    }
    result.trace.records.push_back({0, k, k, m, cum, best, ms_since(start)});
  }
  result.best_config = space.config_from_flat_index(best_k);
  result.best_metric = best;
  result.evaluations = eval.used();
  return result;
}

}  // namespace qtune
