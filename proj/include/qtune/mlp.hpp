#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qtune {

enum class Activation : std::uint32_t { kRelu = 0, kTanh = 1, kIdentity = 2 };

struct TrainingExample {
  std::vector<double> input;
  double target;
};

// Fully connected network with a scalar output. Hidden layers use the
// configured activation, the output layer is affine.
//
// Parameters live in one flat vector, layer by layer: the weight matrix in
// row-major [out][in] order followed by the bias vector.
class Mlp {
 public:
  // `layer_sizes` = {input, hidden..., 1}. Weights are drawn uniformly from
  // +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  Mlp(std::vector<std::size_t> layer_sizes, Activation activation, std::uint64_t seed);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  double forward(std::span<const double> input) const;

  // First-layer pre-activations after accumulating bias and the first
  // prefix.size() inputs. Feeding the result to forward_from_prefix with the
  // remaining inputs performs the same floating-point operations as
  // forward() on the concatenation.
  std::vector<double> prefix_preactivation(std::span<const double> prefix) const;
  double forward_from_prefix(std::span<const double> prefix_pre, std::size_t prefix_size,
                             std::span<const double> suffix) const;

  // Mean squared error over the batch; `grad` receives dLoss/dParams.
  double loss_and_gradient(std::span<const TrainingExample> batch, std::vector<double>& grad) const;
  double loss(std::span<const TrainingExample> batch) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }
  double activate(double z) const;
  double activate_derivative(double z, double a) const;
  double finish_forward(std::vector<double> pre) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  Activation activation_;
  std::vector<double> params_;
};

}  // namespace qtune
