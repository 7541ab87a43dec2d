#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qtune/agents.hpp"
#include "qtune/bench.hpp"
#include "qtune/error.hpp"

namespace qtune {

// Invalid experiment configuration. Maps to exit status 2.
class ConfigError : public ParseError {
 public:
  using ParseError::ParseError;
};

enum class AgentKind { kQi, kRandom, kGrid, kHypRL };

std::string_view agent_name(AgentKind a);

struct SurfaceDecl {
  enum class Kind { kTabular, kQuadratic, kRandomSmooth } kind = Kind::kRandomSmooth;
  std::filesystem::path path;  // tabular only, resolved against the config directory
  Direction direction = Direction::kMaximize;
  std::optional<Configuration> optimum;
  double curvature = 1.0;
  std::optional<std::uint64_t> seed;  // unset: derived from the run seed
  double smoothness = 0.75;
};

struct ExperimentConfig {
  std::optional<SearchSpace> space;  // unset for tabular surfaces, which carry their own
  SurfaceDecl surface;
  std::optional<Surface> tabular;  // loaded while parsing so integrity errors carry a line number
  MetaFeatures metafeatures;
  std::vector<AgentKind> agents;
  std::uint64_t budget = 200;
  QiConfig qi;
  HypRLConfig hyprl;
  std::uint64_t hyprl_find_iters = 10;
  bool hyprl_checkpoint = false;
  std::vector<std::uint64_t> seeds = {1};
  std::optional<std::filesystem::path> output;
  bool timing = false;
};

// Flat `key = value` format; `#` starts a comment. Every diagnostic carries
// the offending line number. `base_dir` resolves relative surface paths.
ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Builds the surface for one run seed. Tabular files are loaded and
// checked against any declared space (IntegrityError / ConfigError).
Surface build_surface(const ExperimentConfig& config, std::uint64_t run_seed);

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the configured seed list
  std::optional<std::filesystem::path> output;
  unsigned parallel = 1;
};

struct RunArtifact {
  AgentKind agent;
  std::uint64_t seed;
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;
};

// Runs every (agent, seed) pair and writes `<agent>-seed<k>.trace.csv` and
// `<agent>-seed<k>.summary.json` into the output directory.
std::vector<RunArtifact> run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Output directory precedence: explicit option, config `output`,
// $QTUNE_OUT_DIR, then ./qtune-out.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options);

struct AgentReport {
  std::string agent;
  std::size_t runs = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::optional<double> within_fraction;  // unset when the optimum is unknown
};

struct CompareReport {
  std::uint64_t budget = 0;
  bool budgets_matched = true;
  double within = 0.01;
  std::vector<AgentReport> agents;

  std::string to_text() const;
};

// Compares every summary in `dir` at the smallest trace length found.
CompareReport compare_runs(const std::filesystem::path& dir, double within = 0.01);

// Linear-interpolated quantile (type 7). `values` need not be sorted.
double quantile(std::vector<double> values, double q);

}  // namespace qtune
