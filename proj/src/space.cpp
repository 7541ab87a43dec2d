#include "qtune/space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "qtune/error.hpp"

namespace qtune {
namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_';
  });
}

bool is_valid_literal(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == ',' || c == ':' || c == '#' || std::isspace(static_cast<unsigned char>(c));
  });
}

bool same_value(const Value& a, const Value& b) {
  if (a.number && b.number) return *a.number == *b.number;
  return a.text == b.text;
}

}  // namespace

std::string_view encoding_name(Encoding e) {
  return e == Encoding::kOneHot ? "onehot" : "scalar";
}

Value Value::parse(std::string_view literal) {
  Value v{std::string(literal), std::nullopt};
  double x = 0.0;
  const char* first = literal.data();
  const char* last = literal.data() + literal.size();
  if (!literal.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec == std::errc() && ptr == last && std::isfinite(x)) v.number = x;
  return v;
}

Dimension::Dimension(std::string name, std::vector<Value> values, Encoding encoding)
    : name_(std::move(name)), values_(std::move(values)), encoding_(encoding) {
  if (!is_identifier(name_)) {
    throw SpaceError("dimension name '" + name_ + "' is not an identifier");
  }
  if (values_.empty()) throw SpaceError("dimension '" + name_ + "' has no values");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!is_valid_literal(values_[i].text)) {
      throw SpaceError("dimension '" + name_ + "': invalid value literal '" +
                       values_[i].text + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (same_value(values_[i], values_[j])) {
        throw SpaceError("dimension '" + name_ + "': duplicate value '" +
                         values_[i].text + "'");
      }
    }
  }
  if (encoding_ == Encoding::kScalar) {
    for (const auto& v : values_) {
      if (!v.number) {
        throw SpaceError("dimension '" + name_ + "': scalar encoding requires numeric values, got '" +
                         v.text + "'");
      }
    }
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.end(),
                                        [](const Value& a, const Value& b) { return *a.number < *b.number; });
    min_ = *lo->number;
    max_ = *hi->number;
  }
}

Dimension Dimension::of(std::string name, const std::vector<std::string>& literals,
                        Encoding encoding) {
  std::vector<Value> values;
  values.reserve(literals.size());
  for (const auto& l : literals) values.push_back(Value::parse(l));
  return Dimension(std::move(name), std::move(values), encoding);
}

std::size_t Dimension::encoded_width() const {
  return encoding_ == Encoding::kOneHot ? values_.size() : 1;
}

void Dimension::encode_into(std::size_t index, std::span<double> out) const {
  if (index >= values_.size()) {
    throw SpaceError("dimension '" + name_ + "': value index " + std::to_string(index) +
                     " out of range (size " + std::to_string(values_.size()) + ")");
  }
  if (encoding_ == Encoding::kOneHot) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(values_.size()), 0.0);
    out[index] = 1.0;
  } else {
    out[0] = max_ == min_ ? 0.0 : (*values_[index].number - min_) / (max_ - min_);
  }
}

std::string Dimension::to_spec() const {
  std::string s = name_;
  s += ':';
  s += encoding_name(encoding_);
  s += ':';
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) s += ',';
    s += values_[i].text;
  }
  return s;
}

Dimension Dimension::parse_spec(std::string_view spec) {
  auto first = spec.find(':');
  auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw SpaceError("dimension spec '" + std::string(spec) +
                     "' is not of the form name:encoding:v1,v2,...");
  }
  std::string name(spec.substr(0, first));
  std::string_view enc = spec.substr(first + 1, second - first - 1);
  Encoding encoding;
  if (enc == "onehot") {
    encoding = Encoding::kOneHot;
  } else if (enc == "scalar") {
    encoding = Encoding::kScalar;
  } else {
    throw SpaceError("dimension '" + name + "': unknown encoding '" + std::string(enc) + "'");
  }
  std::vector<Value> values;
  std::string_view rest = spec.substr(second + 1);
  while (true) {
    auto comma = rest.find(',');
    values.push_back(Value::parse(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return Dimension(std::move(name), std::move(values), encoding);
}

bool Dimension::operator==(const Dimension& other) const {
  if (name_ != other.name_ || encoding_ != other.encoding_ || values_.size() != other.values_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].text != other.values_[i].text) return false;
  }
  return true;
}

SearchSpace::SearchSpace(std::vector<Dimension> dimensions) : dims_(std::move(dimensions)) {
  if (dims_.empty()) throw SpaceError("search space has no dimensions");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dims_[i].name() == dims_[j].name()) {
        throw SpaceError("duplicate dimension name '" + dims_[i].name() + "'");
      }
    }
    const std::uint64_t n = dims_[i].size();
    cardinality_ = cardinality_ > UINT64_MAX / n ? UINT64_MAX : cardinality_ * n;
    encoded_width_ += dims_[i].encoded_width();
  }
}

void SearchSpace::validate(const Configuration& config) const {
  if (config.indices.size() != dims_.size()) {
    throw SpaceError("configuration has " + std::to_string(config.indices.size()) +
                     " indices, space has " + std::to_string(dims_.size()) + " dimensions");
  }
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (config.indices[i] >= dims_[i].size()) {
      throw SpaceError("dimension '" + dims_[i].name() + "': value index " +
                       std::to_string(config.indices[i]) + " out of range (size " +
                       std::to_string(dims_[i].size()) + ")");
    }
  }
}

bool SearchSpace::contains(const Configuration& config) const {
  if (config.indices.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (config.indices[i] >= dims_[i].size()) return false;
  }
  return true;
}

std::vector<double> SearchSpace::encode(const Configuration& config) const {
  std::vector<double> out(encoded_width_);
  encode_into(config, out);
  return out;
}

void SearchSpace::encode_into(const Configuration& config, std::span<double> out) const {
  if (config.indices.size() != dims_.size()) validate(config);
  if (out.size() != encoded_width_) {
    throw SpaceError("encode buffer has " + std::to_string(out.size()) + " slots, need " +
                     std::to_string(encoded_width_));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto w = dims_[i].encoded_width();
    dims_[i].encode_into(config.indices[i], out.subspan(offset, w));
    offset += w;
  }
}

Configuration SearchSpace::config_from_flat_index(std::uint64_t k) const {
  if (k >= cardinality_) {
    throw SpaceError("flat index " + std::to_string(k) + " out of range (cardinality " +
                     std::to_string(cardinality_) + ")");
  }
  Configuration c;
  c.indices.resize(dims_.size());
  for (std::size_t i = dims_.size(); i-- > 0;) {
    const std::uint64_t n = dims_[i].size();
    c.indices[i] = static_cast<std::size_t>(k % n);
    k /= n;
  }
  return c;
}

std::uint64_t SearchSpace::flat_index(const Configuration& config) const {
  validate(config);
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    k = k * dims_[i].size() + config.indices[i];
  }
  return k;
}

std::vector<SingleDimAction> SearchSpace::single_dim_actions() const {
  std::vector<SingleDimAction> actions;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    for (std::size_t v = 0; v < dims_[i].size(); ++v) actions.push_back({i, v});
  }
  return actions;
}

Configuration SearchSpace::apply(const Configuration& config, const SingleDimAction& action) const {
  if (action.dim >= dims_.size() || action.value >= dims_[action.dim].size()) {
    throw SpaceError("action (" + std::to_string(action.dim) + ", " +
                     std::to_string(action.value) + ") is not valid for this space");
  }
  Configuration next = config;
  next.indices[action.dim] = action.value;
  return next;
}

std::string SearchSpace::describe(const Configuration& config) const {
  validate(config);
  std::ostringstream os;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ' ';
    os << dims_[i].name() << '=' << dims_[i].values()[config.indices[i]].text;
  }
  return os.str();
}

SearchSpace lstm_grid_space() {
  return SearchSpace({
      Dimension::of("activation", {"relu", "leaky_relu", "tanh"}, Encoding::kOneHot),
      Dimension::of("neurons", {"5", "10", "20"}, Encoding::kScalar),
      Dimension::of("hidden_units", {"10", "20", "50"}, Encoding::kScalar),
      Dimension::of("optimizer", {"adam", "adadelta", "adagrad"}, Encoding::kOneHot),
      Dimension::of("epochs", {"10", "100"}, Encoding::kScalar),
      Dimension::of("dropout", {"0", "0.2", "0.4"}, Encoding::kScalar),
      Dimension::of("regularization", {"l1", "l2"}, Encoding::kOneHot),
      Dimension::of("regularization_constant", {"0.01", "0.001", "0.0001"}, Encoding::kScalar),
  });
}

SearchSpace cnn_grid_space() {
  return SearchSpace({
      Dimension::of("learning_rate", {"0.0001", "0.001", "0.01", "0.1"}, Encoding::kScalar),
      Dimension::of("momentum", {"0.5", "0.9", "0.95", "0.99"}, Encoding::kScalar),
      Dimension::of("kernel_size", {"1x1", "3x3", "5x5"}, Encoding::kOneHot),
      Dimension::of("fc_units", {"128", "256", "512", "1024"}, Encoding::kScalar),
      Dimension::of("dropout", {"0.3", "0.4", "0.5", "0.6", "0.7"}, Encoding::kScalar),
      Dimension::of("batch_size", {"16", "32", "64", "128"}, Encoding::kScalar),
  });
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (auto i : c.indices) {
    h ^= i + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace qtune
