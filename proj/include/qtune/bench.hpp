#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qtune/space.hpp"

namespace qtune {

enum class Direction { kMaximize, kMinimize };

std::string_view direction_name(Direction d);

// Cardinality above which exhaustive operations refuse to run.
inline constexpr std::uint64_t kDeskScaleLimit = 1'000'000;

// Identifier of the value-noise generator, written into materialized files.
// Kernel width used when a configuration does not set one.
inline constexpr double kDefaultSmoothness = 0.75;

inline constexpr std::string_view kRandomSmoothAlgorithm = "splitmix64-gauss-separable-v1";

struct TabularKind {};

struct QuadraticKind {
  Configuration optimum;
  double curvature;
};

struct RandomSmoothKind {
  std::uint64_t seed;
  double smoothness;
};

using SurfaceKind = std::variant<TabularKind, QuadraticKind, RandomSmoothKind>;

// Evaluation oracle: configuration -> metric in [0, 1]. Immutable; copies
// share the underlying table.
class Surface {
 public:
  static Surface tabular(SearchSpace space, std::vector<double> metrics,
                         Direction direction = Direction::kMaximize);

  // metric = clamp(1 - curvature * d^2, 0, 1) where d is the Euclidean
  // distance between encodings divided by the largest possible distance.
  static Surface quadratic(SearchSpace space, Configuration optimum, double curvature,
                           Direction direction = Direction::kMaximize);

  // Uniform lattice noise (one splitmix64 draw per cell) smoothed by a
  // row-normalized Gaussian kernel of width `smoothness` over each
  // dimension's encoding, then min-max rescaled to [0, 1] over the grid.
  static Surface random_smooth(SearchSpace space, std::uint64_t seed, double smoothness,
                               Direction direction = Direction::kMaximize);

  const SearchSpace& space() const { return *space_; }
  const SurfaceKind& kind() const { return kind_; }
  Direction direction() const { return direction_; }

  // Raw metric, in the surface's own direction.
  double evaluate(const Configuration& config) const;
  double evaluate_flat(std::uint64_t k) const;

  // Maximize-form metric: raw for Maximize surfaces, 1 - raw for Minimize.
  double score(const Configuration& config) const;
  double score_flat(std::uint64_t k) const;

  // Full metric table when one exists (tabular and random-smooth surfaces).
  std::optional<std::span<const double>> table() const;

  // A Tabular surface with identical metrics on every cell.
  Surface materialize() const;

  // One-line description of how the surface was produced.
  std::string provenance() const;

 private:
  Surface(std::shared_ptr<const SearchSpace> space, SurfaceKind kind, Direction direction,
          std::shared_ptr<const std::vector<double>> table);

  std::shared_ptr<const SearchSpace> space_;
  SurfaceKind kind_;
  Direction direction_;
  std::shared_ptr<const std::vector<double>> table_;
  double max_sq_distance_ = 1.0;
  std::string source_;

  friend Surface read_tabular(std::istream& is);
};

struct BestOf {
  Configuration config;
  std::uint64_t flat_index;
  double metric;  // raw
  double score;   // maximize-form
};

// Exhaustive scan honoring the surface direction; ties go to the lowest
// flat index. Throws SpaceError when cardinality exceeds `limit`.
BestOf best_of(const Surface& surface, std::uint64_t limit = kDeskScaleLimit);

// Counts evaluations against a fixed budget. Single-owner.
class CountingEvaluator {
 public:
  CountingEvaluator(const Surface& surface, std::uint64_t budget)
      : surface_(surface), budget_(budget) {}

  // Maximize-form score; throws BudgetExceeded past the budget.
  double score(const Configuration& config);

  std::uint64_t used() const { return used_; }
  std::uint64_t budget() const { return budget_; }
  const Surface& surface() const { return surface_; }

 private:
  const Surface& surface_;
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
};

// [log10(#instances), log10(#features), #numeric, #categorical, #classes,
//  mean of feature means, mean of feature stds, mean feature skewness]
struct MetaFeatures {
  static constexpr std::size_t kSize = 8;
  std::array<double, kSize> values{};

  static MetaFeatures from_vector(std::span<const double> v);
  bool operator==(const MetaFeatures&) const = default;
};

struct DatasetSummary {
  std::optional<std::uint64_t> num_instances;
  std::optional<std::uint64_t> num_numeric_features;
  std::optional<std::uint64_t> num_categorical_features;
  std::optional<std::uint64_t> num_classes;
  std::optional<std::vector<double>> feature_means;
  std::optional<std::vector<double>> feature_stds;
  std::optional<std::vector<double>> feature_skews;
};

// Throws ArgumentError listing every absent field.
MetaFeatures metafeatures(const DatasetSummary& summary);

// Tabular file format:
//   #space name:encoding:v1,v2,...   (one per dimension, in order)
//   #direction maximize|minimize
//   #source <free text>              (optional)
//   <flat_index>,<metric>            (one per cell, row-major order)
void write_tabular(std::ostream& os, const Surface& surface);
Surface read_tabular(std::istream& is);

void save_tabular(const std::filesystem::path& path, const Surface& surface);
Surface load_tabular(const std::filesystem::path& path);

// Shortest decimal that parses back to the same double.
std::string format_double(double x);

}  // namespace qtune
