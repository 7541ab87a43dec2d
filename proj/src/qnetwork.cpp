#include "qtune/qnetwork.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qtune/error.hpp"
#include "qtune/io.hpp"

namespace qtune {
namespace {

constexpr std::array<char, 8> kMagic = {'Q', 'T', 'U', 'N', 'E', 'Q', 'N', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::size_t> layer_sizes_for(std::size_t config_width, const QNetworkOptions& o) {
  std::vector<std::size_t> sizes;
  sizes.push_back(MetaFeatures::kSize + 2 * config_width + 1);
  sizes.insert(sizes.end(), o.hidden.begin(), o.hidden.end());
  sizes.push_back(1);
  return sizes;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }

std::uint64_t get_bytes(std::istream& is, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw ParseError(0, "truncated Q-network checkpoint");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::uint32_t get_u32(std::istream& is) { return static_cast<std::uint32_t>(get_bytes(is, 4)); }
std::uint64_t get_u64(std::istream& is) { return get_bytes(is, 8); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

ActionTable::ActionTable(const SearchSpace& space)
    : count_(static_cast<std::size_t>(space.cardinality())), width_(space.encoded_width()) {
  if (space.cardinality() > kDeskScaleLimit) {
    throw SpaceError("action table needs cardinality <= " + std::to_string(kDeskScaleLimit));
  }
  data_.resize(count_ * width_);
  for (std::size_t k = 0; k < count_; ++k) {
    space.encode_into(space.config_from_flat_index(k),
                      std::span<double>(data_).subspan(k * width_, width_));
  }
}

QNetwork::QNetwork(std::size_t config_width, const QNetworkOptions& options)
    : config_width_(config_width),
      seed_(options.seed),
      online_(layer_sizes_for(config_width, options), options.activation, options.seed),
      target_(online_) {}

std::vector<double> QNetwork::input_for(std::span<const double> state_vector,
                                        std::span<const double> action_encoding) const {
  if (state_vector.size() != state_size() || action_encoding.size() != config_width_) {
    throw ArgumentError("Q-network input layout mismatch: state " +
                        std::to_string(state_vector.size()) + "/" + std::to_string(state_size()) +
                        ", action " + std::to_string(action_encoding.size()) + "/" +
                        std::to_string(config_width_));
  }
  std::vector<double> x(state_vector.begin(), state_vector.end());
  x.insert(x.end(), action_encoding.begin(), action_encoding.end());
  return x;
}

double QNetwork::predict(const HypRLState& state, std::span<const double> action_encoding) const {
  return predict(state.to_vector(), action_encoding);
}

double QNetwork::predict(std::span<const double> state_vector,
                         std::span<const double> action_encoding) const {
  return online_.forward(input_for(state_vector, action_encoding));
}

std::vector<double> QNetwork::predict_all_with(const Mlp& net, std::span<const double> state_vector,
                                               const ActionTable& actions) {
  const auto pre = net.prefix_preactivation(state_vector);
  std::vector<double> q(actions.size());
  for (std::size_t k = 0; k < actions.size(); ++k) {
    q[k] = net.forward_from_prefix(pre, state_vector.size(), actions.encoding(k));
  }
  return q;
}

std::vector<double> QNetwork::predict_all(std::span<const double> state_vector,
                                          const ActionTable& actions) const {
  if (state_vector.size() != state_size() || actions.width() != config_width_) {
    throw ArgumentError("Q-network input layout mismatch");
  }
  return predict_all_with(online_, state_vector, actions);
}

std::vector<double> QNetwork::predict_all_target(std::span<const double> state_vector,
                                                 const ActionTable& actions) const {
  if (state_vector.size() != state_size() || actions.width() != config_width_) {
    throw ArgumentError("Q-network input layout mismatch");
  }
  return predict_all_with(target_, state_vector, actions);
}

double QNetwork::train_minibatch(std::span<const TrainingExample> batch, double learning_rate) {
  if (batch.empty()) throw ArgumentError("train_minibatch: empty batch");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("train_minibatch: learning rate must be positive and finite");
  }
  for (const auto& ex : batch) {
    if (!std::isfinite(ex.target)) throw ArgumentError("train_minibatch: non-finite target");
  }
  const double loss = online_.loss_and_gradient(batch, grad_);
  if (!std::isfinite(loss)) {
    throw DivergenceError("train_minibatch: loss is not finite; step discarded");
  }
  for (std::size_t i = 0; i < grad_.size(); ++i) {
    if (!std::isfinite(grad_[i])) {
      throw DivergenceError("train_minibatch: gradient component " + std::to_string(i) +
                            " is not finite; step discarded");
    }
  }
  auto params = online_.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad_[i];
  return loss;
}

void QNetwork::sync_target() {
  auto src = online_.params();
  auto dst = target_.params();
  std::copy(src.begin(), src.end(), dst.begin());
}

// Layout: magic[8] | u32 version | u32 activation | u64 seed | u64 config_width
//         | u64 n_layers | u64 sizes[n_layers] | u64 n_params
//         | f64 online[n_params] | f64 target[n_params]
void QNetwork::save(std::ostream& os) const {
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(online_.activation()));
  put_u64(os, seed_);
  put_u64(os, config_width_);
  const auto& sizes = online_.layer_sizes();
  put_u64(os, sizes.size());
  for (auto s : sizes) put_u64(os, s);
  put_u64(os, online_.num_params());
  for (double p : online_.params()) put_f64(os, p);
  for (double p : target_.params()) put_f64(os, p);
}

QNetwork QNetwork::load(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw ParseError(0, "not a Q-network checkpoint");
  const auto version = get_u32(is);
  if (version != kCheckpointVersion) {
    throw ParseError(0, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto activation = get_u32(is);
  if (activation > static_cast<std::uint32_t>(Activation::kIdentity)) {
    throw ParseError(0, "unknown activation id " + std::to_string(activation));
  }
  QNetworkOptions options;
  options.activation = static_cast<Activation>(activation);
  options.seed = get_u64(is);
  const auto config_width = get_u64(is);
  const auto n_layers = get_u64(is);
  if (n_layers < 2 || n_layers > 64) throw ParseError(0, "implausible layer count");
  std::vector<std::size_t> sizes(n_layers);
  for (auto& s : sizes) s = get_u64(is);
  if (sizes.front() != MetaFeatures::kSize + 2 * config_width + 1 || sizes.back() != 1) {
    throw IntegrityError("checkpoint layer sizes do not match its input layout");
  }
  options.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  QNetwork net(config_width, options);
  const auto n_params = get_u64(is);
  if (n_params != net.online_.num_params()) {
    throw IntegrityError("checkpoint parameter count does not match its layer sizes");
  }
  for (double& p : net.online_.params()) p = get_f64(is);
  for (double& p : net.target_.params()) p = get_f64(is);
  return net;
}

void QNetwork::save(const std::filesystem::path& path) const {
  std::ostringstream os(std::ios::binary);
  save(os);
  write_file_atomic(path, os.str());
}

QNetwork QNetwork::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return load(in);
}

double target_value(double reward, double gamma, std::span<const double> next_state_vector,
                    const ActionTable& actions, const QNetwork& net, bool terminal) {
  if (terminal || gamma == 0.0) return reward;
  if (actions.size() == 0) throw ArgumentError("target_value: empty action set for a non-terminal state");
  const auto q = net.predict_all_target(next_state_vector, actions);
  return reward + gamma * *std::max_element(q.begin(), q.end());
}

}  // namespace qtune
