#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qtune/error.hpp"
#include "qtune/policy.hpp"
#include "qtune/random.hpp"
#include "qtune/replay_buffer.hpp"

using namespace qtune;

TEST(Policy, GreedyPicksArgmax) {
  const std::vector<double> q = {0.1, 0.9, 0.3};
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(select(EpsilonGreedy{0.0}, q, rng), 1u);
}

TEST(Policy, ArgmaxTiesGoLow) {
  const std::vector<double> q = {0.2, 0.7, 0.7, 0.1};
  EXPECT_EQ(argmax(q), 1u);
}

TEST(Policy, EpsilonOneIsUniform) {
  const std::vector<double> q = {5.0, 0.0, 1.0, 2.0, -3.0};
  Rng rng(2);
  const std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(q.size(), 0);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[select(EpsilonGreedy{1.0}, q, rng)];
  const std::vector<double> p(q.size(), 1.0 / static_cast<double>(q.size()));
  EXPECT_LT(oracle::chi_square(counts, p, n), oracle::kChiSquare99[q.size() - 1]);
}

TEST(Policy, SoftmaxTwoActions) {
  const std::vector<double> q = {1.0, 2.0};
  const double e = std::exp(1.0);
  const auto p = action_probabilities(Softmax{1.0}, q);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(p[1], e / (1.0 + e), 1e-15);
  Rng rng(3);
  const std::uint64_t n = 100000;
  std::uint64_t ones = 0;
  for (std::uint64_t i = 0; i < n; ++i) ones += select(Softmax{1.0}, q, rng);
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.7311, 0.01);
}

TEST(Policy, ShiftInvariance) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(7), shifted(7);
    const double c = rng.uniform(-50, 50);
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = rng.uniform(-3, 3);
      shifted[i] = q[i] + c;
    }
    ASSERT_EQ(argmax(q), argmax(shifted));
    const auto a = action_probabilities(Softmax{0.7}, q);
    const auto b = action_probabilities(Softmax{0.7}, shifted);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
  }
  // Adding zero-spaced exact constants keeps bits identical.
  const std::vector<double> q = {0.5, 1.5, 2.5};
  const std::vector<double> s = {1.5, 2.5, 3.5};
  EXPECT_EQ(action_probabilities(Softmax{1.0}, q), action_probabilities(Softmax{1.0}, s));
}

TEST(Policy, ColdSoftmaxIsGreedy) {
  const std::vector<double> q = {0.3, 0.31, 0.1};
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) ASSERT_EQ(select(Softmax{1e-6}, q, rng), 1u);
}

TEST(Policy, SelectStaysInRange) {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> q(1 + rng.uniform_index(20));
    for (auto& v : q) v = rng.uniform(-1e3, 1e3);
    const PolicyConfig p = trial % 2 ? PolicyConfig{EpsilonGreedy{rng.uniform01()}}
                                     : PolicyConfig{Softmax{rng.uniform(1e-3, 10)}};
    ASSERT_LT(select(p, q, rng), q.size());
  }
}

TEST(Policy, Validation) {
  EXPECT_THROW(validate_policy(EpsilonGreedy{1.5}), ArgumentError);
  EXPECT_THROW(validate_policy(Softmax{0.0}), ArgumentError);
}

TEST(Policy, LinearSchedule) {
  const LinearEpsilonSchedule s{1.0, 0.1, 10};
  EXPECT_EQ(s.at(0), 1.0);
  EXPECT_NEAR(s.at(5), 0.55, 1e-15);
  EXPECT_EQ(s.at(10), 0.1);
  EXPECT_EQ(s.at(1000), 0.1);
}

TEST(ReplayBuffer, EvictsOldest) {
  ReplayBuffer<int> b(2);
  b.push(1);
  b.push(2);
  b.push(3);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], 2);
  EXPECT_EQ(b[1], 3);
}

TEST(ReplayBuffer, SamplesWithReplacement) {
  ReplayBuffer<int> b(5);
  b.push(7);
  Rng rng(1);
  EXPECT_EQ(b.sample(4, rng), (std::vector<int>{7, 7, 7, 7}));
  ReplayBuffer<int> empty(3);
  EXPECT_THROW(empty.sample(1, rng), ArgumentError);
  EXPECT_THROW(ReplayBuffer<int>(0), ArgumentError);
}

TEST(ReplayBuffer, FifoOverManyPushes) {
  ReplayBuffer<int> b(37);
  for (int i = 0; i < 10000; ++i) {
    b.push(i);
    ASSERT_LE(b.size(), 37u);
    const int oldest = std::max(0, i - 36);
    ASSERT_EQ(b[0], oldest);
    ASSERT_EQ(b[b.size() - 1], i);
  }
}

TEST(ReplayBuffer, UniformSampling) {
  ReplayBuffer<int> b(10);
  for (int i = 0; i < 10; ++i) b.push(i);
  Rng rng(9);
  const std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(10, 0);
  for (auto x : b.sample(n, rng)) ++counts[static_cast<std::size_t>(x)];
  EXPECT_LT(oracle::chi_square(counts, std::vector<double>(10, 0.1), n), oracle::kChiSquare99[9]);
}
