#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qtune/error.hpp"
#include "qtune/mlp.hpp"
#include "qtune/random.hpp"

using namespace qtune;

namespace {

std::vector<TrainingExample> random_batch(std::size_t n, std::size_t width, Rng& rng) {
  std::vector<TrainingExample> b(n);
  for (auto& ex : b) {
    ex.input.resize(width);
    for (auto& x : ex.input) x = rng.uniform(-1.0, 1.0);
    ex.target = rng.uniform(-1.0, 1.0);
  }
  return b;
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(n[i]), 1e-7});
    worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST(Mlp, ZeroWeightsGiveOutputBias) {
  Mlp net({4, 5, 1}, Activation::kRelu, 1);
  auto p = net.params();
  std::fill(p.begin(), p.end(), 0.0);
  p[p.size() - 1] = 0.42;
  const std::vector<double> x = {0.3, -1.0, 2.0, 0.5};
  EXPECT_EQ(net.forward(x), 0.42);
}

TEST(Mlp, ParameterCountAndInit) {
  Mlp net({3, 4, 2, 1}, Activation::kTanh, 9);
  EXPECT_EQ(net.num_params(), (3u * 4 + 4) + (4u * 2 + 2) + (2u * 1 + 1));
  const auto p = net.params();
  // Biases of the first layer sit right after its 12 weights.
  for (std::size_t i = 12; i < 16; ++i) EXPECT_EQ(p[i], 0.0);
  const double bound = std::sqrt(6.0 / (3 + 4));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_LE(std::abs(p[i]), bound);
}

TEST(Mlp, ForwardIsPureAndSeeded) {
  Mlp a({3, 8, 1}, Activation::kRelu, 5);
  Mlp b({3, 8, 1}, Activation::kRelu, 5);
  const std::vector<double> x = {0.1, 0.2, 0.3};
  EXPECT_EQ(a.forward(x), a.forward(x));
  EXPECT_EQ(a.forward(x), b.forward(x));
  EXPECT_THROW(a.forward(std::vector<double>{1.0}), ArgumentError);
}

TEST(Mlp, PrefixSplitMatchesForward) {
  Mlp net({6, 7, 5, 1}, Activation::kTanh, 3);
  Rng rng(8);
  std::vector<double> x(6);
  for (auto& v : x) v = rng.uniform(-2, 2);
  const std::span<const double> all(x);
  const auto pre = net.prefix_preactivation(all.first(4));
  EXPECT_EQ(net.forward_from_prefix(pre, 4, all.subspan(4)), net.forward(x));
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  for (auto act : {Activation::kRelu, Activation::kTanh, Activation::kIdentity}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed * 31 + static_cast<std::uint64_t>(act));
      Mlp net({5, 8, 6, 1}, act, seed);
      for (auto& p : net.params()) p += rng.uniform(-0.05, 0.05);
      const auto batch = random_batch(4, 5, rng);
      std::vector<double> grad;
      net.loss_and_gradient(batch, grad);
      const auto num = oracle::numeric_gradient(net, batch, 1e-5);
      EXPECT_LT(max_relative_error(grad, num), 1e-4) << "activation " << static_cast<int>(act);
    }
  }
}

TEST(Mlp, ZeroGradientWhenTargetsMatch) {
  Mlp net({3, 4, 1}, Activation::kRelu, 2);
  Rng rng(4);
  auto batch = random_batch(5, 3, rng);
  for (auto& ex : batch) ex.target = net.forward(ex.input);
  std::vector<double> grad;
  EXPECT_EQ(net.loss_and_gradient(batch, grad), 0.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);
}
