#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "qtune/random.hpp"

namespace qtune {

struct EpsilonGreedy {
  double epsilon = 0.1;
};

struct Softmax {
  double temperature = 0.1;
};

using PolicyConfig = std::variant<EpsilonGreedy, Softmax>;

// Throws ArgumentError if epsilon is outside [0, 1] or temperature <= 0.
void validate_policy(const PolicyConfig& policy);

// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

// Selection probabilities. Softmax subtracts the maximum before
// exponentiating, so shifting every q-value by a constant leaves the result
// bit-identical.
std::vector<double> action_probabilities(const PolicyConfig& policy, std::span<const double> q_values);

// Epsilon-greedy draws one uniform number to decide whether to explore and
// a second index draw when it does; the uniform branch includes the greedy
// action. Softmax draws one uniform number and inverts the CDF.
std::size_t select(const PolicyConfig& policy, std::span<const double> q_values, Rng& rng);

// Linear epsilon decay from `start` to `end` over `steps` calls of at().
struct LinearEpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t steps = 1;

  double at(std::uint64_t t) const;
};

}  // namespace qtune
