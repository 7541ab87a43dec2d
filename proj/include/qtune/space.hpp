#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qtune {

enum class Encoding { kOneHot, kScalar };

std::string_view encoding_name(Encoding e);

// A grid value: its literal spelling, plus the parsed number when the
// literal is numeric.
struct Value {
  std::string text;
  std::optional<double> number;

  static Value parse(std::string_view literal);
};

class Dimension {
 public:
  Dimension(std::string name, std::vector<Value> values, Encoding encoding);

  // Convenience: parses each literal with Value::parse.
  static Dimension of(std::string name, const std::vector<std::string>& literals,
                      Encoding encoding);

  const std::string& name() const { return name_; }
  const std::vector<Value>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  Encoding encoding() const { return encoding_; }

  // Number of encoded components this dimension contributes.
  std::size_t encoded_width() const;

  // Writes the encoding of value `index` into `out` (encoded_width() slots).
  void encode_into(std::size_t index, std::span<double> out) const;

  // `name:encoding:v1,v2,...`
  std::string to_spec() const;
  static Dimension parse_spec(std::string_view spec);

  bool operator==(const Dimension& other) const;

 private:
  std::string name_;
  std::vector<Value> values_;
  Encoding encoding_;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct Configuration {
  std::vector<std::size_t> indices;

  bool operator==(const Configuration&) const = default;
};

// Replaces the value of one dimension. Qi-style actions.
struct SingleDimAction {
  std::size_t dim;
  std::size_t value;

  bool operator==(const SingleDimAction&) const = default;
};

class SearchSpace {
 public:
  explicit SearchSpace(std::vector<Dimension> dimensions);

  const std::vector<Dimension>& dimensions() const { return dims_; }
  std::size_t num_dimensions() const { return dims_.size(); }

  // Product of value counts; saturates at UINT64_MAX.
  std::uint64_t cardinality() const { return cardinality_; }

  std::size_t encoded_width() const { return encoded_width_; }

  // Throws SpaceError naming the offending dimension.
  void validate(const Configuration& config) const;
  bool contains(const Configuration& config) const;

  std::vector<double> encode(const Configuration& config) const;
  void encode_into(const Configuration& config, std::span<double> out) const;

  // Row-major: the last dimension varies fastest.
  Configuration config_from_flat_index(std::uint64_t k) const;
  std::uint64_t flat_index(const Configuration& config) const;

  std::vector<SingleDimAction> single_dim_actions() const;
  Configuration apply(const Configuration& config, const SingleDimAction& action) const;

  // Human-readable `name=value` list.
  std::string describe(const Configuration& config) const;

  bool operator==(const SearchSpace& other) const { return dims_ == other.dims_; }

 private:
  std::vector<Dimension> dims_;
  std::uint64_t cardinality_ = 1;
  std::size_t encoded_width_ = 0;
};

// LSTM tuning grid: 2916 cells, 13 encoded components.
SearchSpace lstm_grid_space();

// CNN tuning grid: 3840 cells.
SearchSpace cnn_grid_space();

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept;
};

}  // namespace qtune
