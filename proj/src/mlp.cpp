#include "qtune/mlp.hpp"

#include <cmath>
#include <string>

#include "qtune/error.hpp"
#include "qtune/random.hpp"

namespace qtune {

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ArgumentError("an MLP needs at least an input and an output layer");
  if (sizes_.back() != 1) throw ArgumentError("the Q-network output layer must have width 1");
  for (auto s : sizes_) {
    if (s == 0) throw ArgumentError("MLP layer sizes must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
    const std::size_t n = sizes_[l] * sizes_[l + 1];
    for (std::size_t i = 0; i < n; ++i) params_[offsets_[l] + i] = rng.uniform(-limit, limit);
  }
}

double Mlp::activate(double z) const {
  switch (activation_) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kTanh:
      return std::tanh(z);
    case Activation::kIdentity:
      break;
  }
  return z;
}

double Mlp::activate_derivative(double z, double a) const {
  switch (activation_) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - a * a;
    case Activation::kIdentity:
      break;
  }
  return 1.0;
}

std::vector<double> Mlp::prefix_preactivation(std::span<const double> prefix) const {
  if (prefix.size() > sizes_[0]) throw ArgumentError("MLP prefix longer than the input layer");
  const std::size_t in = sizes_[0], out = sizes_[1];
  const double* w = params_.data() + weight_offset(0);
  const double* b = params_.data() + bias_offset(0);
  std::vector<double> pre(b, b + out);
  for (std::size_t i = 0; i < out; ++i) {
    double acc = pre[i];
    const double* row = w + i * in;
    for (std::size_t j = 0; j < prefix.size(); ++j) acc += row[j] * prefix[j];
    pre[i] = acc;
  }
  return pre;
}

double Mlp::forward_from_prefix(std::span<const double> prefix_pre, std::size_t prefix_size,
                                std::span<const double> suffix) const {
  const std::size_t in = sizes_[0], out = sizes_[1];
  if (prefix_pre.size() != out || prefix_size + suffix.size() != in) {
    throw ArgumentError("MLP input has " + std::to_string(prefix_size + suffix.size()) +
                        " components, expected " + std::to_string(in));
  }
  const double* w = params_.data() + weight_offset(0);
  std::vector<double> pre(prefix_pre.begin(), prefix_pre.end());
  for (std::size_t i = 0; i < out; ++i) {
    double acc = pre[i];
    const double* row = w + i * in + prefix_size;
    for (std::size_t j = 0; j < suffix.size(); ++j) acc += row[j] * suffix[j];
    pre[i] = acc;
  }
  return finish_forward(std::move(pre));
}

double Mlp::forward(std::span<const double> input) const {
  if (input.size() != sizes_[0]) {
    throw ArgumentError("MLP input has " + std::to_string(input.size()) + " components, expected " +
                        std::to_string(sizes_[0]));
  }
  return finish_forward(prefix_preactivation(input));
}

// Continues from first-layer pre-activations to the scalar output.
double Mlp::finish_forward(std::vector<double> pre) const {
  std::vector<double> act(pre.size());
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 1; l < layers; ++l) {
    for (std::size_t i = 0; i < pre.size(); ++i) act[i] = activate(pre[i]);
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    pre.assign(b, b + out);
    for (std::size_t i = 0; i < out; ++i) {
      double acc = pre[i];
      const double* row = w + i * in;
      for (std::size_t j = 0; j < in; ++j) acc += row[j] * act[j];
      pre[i] = acc;
    }
    act.resize(out);
  }
  // Single-layer networks are purely affine; otherwise the last loop left the
  // output pre-activation in pre[0].
  return pre[0];
}

double Mlp::loss(std::span<const TrainingExample> batch) const {
  if (batch.empty()) throw ArgumentError("empty training batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const double d = forward(ex.input) - ex.target;
    total += d * d;
  }
  return total / static_cast<double>(batch.size());
}

double Mlp::loss_and_gradient(std::span<const TrainingExample> batch, std::vector<double>& grad) const {
  if (batch.empty()) throw ArgumentError("empty training batch");
  grad.assign(params_.size(), 0.0);
  const std::size_t layers = sizes_.size() - 1;
  const double scale = 1.0 / static_cast<double>(batch.size());

  // Per-layer activations (index 0 = input) and pre-activations.
  std::vector<std::vector<double>> acts(layers + 1), pres(layers + 1);
  std::vector<double> delta, next_delta;
  double total = 0.0;

  for (const auto& ex : batch) {
    if (ex.input.size() != sizes_[0]) {
      throw ArgumentError("MLP input has " + std::to_string(ex.input.size()) +
                          " components, expected " + std::to_string(sizes_[0]));
    }
    acts[0] = ex.input;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset(l);
      const double* b = params_.data() + bias_offset(l);
      auto& pre = pres[l + 1];
      pre.assign(b, b + out);
      for (std::size_t i = 0; i < out; ++i) {
        double acc = pre[i];
        const double* row = w + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * acts[l][j];
        pre[i] = acc;
      }
      auto& a = acts[l + 1];
      a.resize(out);
      const bool output_layer = l + 1 == layers;
      for (std::size_t i = 0; i < out; ++i) a[i] = output_layer ? pre[i] : activate(pre[i]);
    }
    const double err = acts[layers][0] - ex.target;
    total += err * err;

    delta.assign(1, 2.0 * err * scale);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      double* gw = grad.data() + weight_offset(l);
      double* gb = grad.data() + bias_offset(l);
      const double* w = params_.data() + weight_offset(l);
      for (std::size_t i = 0; i < out; ++i) {
        gb[i] += delta[i];
        double* grow = gw + i * in;
        for (std::size_t j = 0; j < in; ++j) grow[j] += delta[i] * acts[l][j];
      }
      if (l == 0) break;
      next_delta.assign(in, 0.0);
      for (std::size_t i = 0; i < out; ++i) {
        const double* row = w + i * in;
        for (std::size_t j = 0; j < in; ++j) next_delta[j] += row[j] * delta[i];
      }
      for (std::size_t j = 0; j < in; ++j) {
        next_delta[j] *= activate_derivative(pres[l][j], acts[l][j]);
      }
      delta.swap(next_delta);
    }
  }
  return total * scale;
}

}  // namespace qtune
