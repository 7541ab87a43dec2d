#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "qtune/mdp.hpp"
#include "qtune/mlp.hpp"
#include "qtune/space.hpp"

namespace qtune {

// Encodings of every configuration of a space, indexed by flat index.
class ActionTable {
 public:
  explicit ActionTable(const SearchSpace& space);

  std::size_t size() const { return count_; }
  std::size_t width() const { return width_; }
  std::span<const double> encoding(std::size_t k) const {
    return std::span<const double>(data_).subspan(k * width_, width_);
  }

 private:
  std::size_t count_;
  std::size_t width_;
  std::vector<double> data_;
};

struct QNetworkOptions {
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;
};

// Q(s, a) approximator over inputs state_vector ++ encode(action), plus a
// target copy that changes only through sync_target().
class QNetwork {
 public:
  QNetwork(std::size_t config_width, const QNetworkOptions& options);

  std::size_t config_width() const { return config_width_; }
  std::size_t state_size() const { return MetaFeatures::kSize + config_width_ + 1; }
  std::uint64_t seed() const { return seed_; }

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  Mlp& online_mutable() { return online_; }

  double predict(const HypRLState& state, std::span<const double> action_encoding) const;
  double predict(std::span<const double> state_vector, std::span<const double> action_encoding) const;

  // Q-values of every action for one state; shares the state part of the
  // first layer across actions. Bit-identical to looping over predict().
  std::vector<double> predict_all(std::span<const double> state_vector, const ActionTable& actions) const;
  std::vector<double> predict_all_target(std::span<const double> state_vector,
                                         const ActionTable& actions) const;

  // One SGD step on the batch MSE. Returns the pre-step loss. Throws
  // DivergenceError (weights untouched) on non-finite loss or gradient.
  double train_minibatch(std::span<const TrainingExample> batch, double learning_rate);

  void sync_target();

  // Little-endian binary checkpoint; see README for the layout.
  void save(std::ostream& os) const;
  static QNetwork load(std::istream& is);
  void save(const std::filesystem::path& path) const;
  static QNetwork load(const std::filesystem::path& path);

 private:
  std::vector<double> input_for(std::span<const double> state_vector,
                                std::span<const double> action_encoding) const;
  static std::vector<double> predict_all_with(const Mlp& net, std::span<const double> state_vector,
                                              const ActionTable& actions);

  std::size_t config_width_;
  std::uint64_t seed_;
  Mlp online_;
  Mlp target_;
  std::vector<double> grad_;
};

// Bootstrapped regression target: r when terminal, else
// r + gamma * max_a Q_target(s', a).
double target_value(double reward, double gamma, std::span<const double> next_state_vector,
                    const ActionTable& actions, const QNetwork& net, bool terminal);

}  // namespace qtune
