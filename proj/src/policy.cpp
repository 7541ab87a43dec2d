#include "qtune/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtune/error.hpp"

namespace qtune {
namespace {

void check_q_values(std::span<const double> q) {
  if (q.empty()) throw ArgumentError("policy: empty action set");
  for (double v : q) {
    if (!std::isfinite(v)) throw ArgumentError("policy: non-finite q-value");
  }
}

}  // namespace

void validate_policy(const PolicyConfig& policy) {
  if (const auto* eg = std::get_if<EpsilonGreedy>(&policy)) {
    if (!(eg->epsilon >= 0.0 && eg->epsilon <= 1.0)) {
      throw ArgumentError("epsilon must lie in [0, 1], got " + std::to_string(eg->epsilon));
    }
  } else {
    const auto& sm = std::get<Softmax>(policy);
    if (!(sm.temperature > 0.0) || !std::isfinite(sm.temperature)) {
      throw ArgumentError("softmax temperature must be positive, got " + std::to_string(sm.temperature));
    }
  }
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("argmax of an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> action_probabilities(const PolicyConfig& policy, std::span<const double> q) {
  check_q_values(q);
  validate_policy(policy);
  const std::size_t n = q.size();
  std::vector<double> p(n, 0.0);
  if (const auto* eg = std::get_if<EpsilonGreedy>(&policy)) {
    const double share = eg->epsilon / static_cast<double>(n);
    std::fill(p.begin(), p.end(), share);
    p[argmax(q)] += 1.0 - eg->epsilon;
    return p;
  }
  const double tau = std::get<Softmax>(policy).temperature;
  const double top = q[argmax(q)];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp((q[i] - top) / tau);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

std::size_t select(const PolicyConfig& policy, std::span<const double> q, Rng& rng) {
  check_q_values(q);
  if (const auto* eg = std::get_if<EpsilonGreedy>(&policy)) {
    validate_policy(policy);
    if (eg->epsilon > 0.0 && rng.uniform01() < eg->epsilon) return rng.uniform_index(q.size());
    return argmax(q);
  }
  const auto p = action_probabilities(policy, q);
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  // Rounding left the CDF just short of 1; fall back to the last action
  // with non-zero mass.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  return argmax(q);
}

double LinearEpsilonSchedule::at(std::uint64_t t) const {
  if (steps == 0 || t >= steps) return end;
  const double frac = static_cast<double>(t) / static_cast<double>(steps);
  return start + (end - start) * frac;
}

}  // namespace qtune
