// qtune command-line front end.
//
// Exit status: 0 success, 1 runtime failure, 2 invalid input.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "qtune/bench.hpp"
#include "qtune/experiment.hpp"
#include "qtune/log.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

struct GenSurfaceArgs {
  std::string preset;
  std::vector<std::string> dims;
  std::string kind = "random_smooth";
  std::uint64_t seed = 0;
  double smoothness = qtune::kDefaultSmoothness;
  double curvature = 1.0;
  std::vector<std::size_t> optimum;
  std::string direction = "maximize";
  std::string out;
};

qtune::SearchSpace space_from(const GenSurfaceArgs& a) {
  if (!a.preset.empty() && !a.dims.empty()) throw qtune::ArgumentError("--preset and --dim are exclusive");
  if (a.preset == "lstm_grid") return qtune::lstm_grid_space();
  if (a.preset == "cnn_grid") return qtune::cnn_grid_space();
  if (!a.preset.empty()) throw qtune::ArgumentError("unknown preset '" + a.preset + "'");
  if (a.dims.empty()) throw qtune::ArgumentError("declare the space with --preset or --dim");
  std::vector<qtune::Dimension> dims;
  for (const auto& d : a.dims) dims.push_back(qtune::Dimension::parse_spec(d));
  return qtune::SearchSpace(std::move(dims));
}

int gen_surface(const GenSurfaceArgs& a) {
  auto space = space_from(a);
  if (space.cardinality() > qtune::kDeskScaleLimit) {
    throw qtune::SpaceError("space has " + std::to_string(space.cardinality()) + " cells; the limit is " +
                            std::to_string(qtune::kDeskScaleLimit));
  }
  const auto dir = a.direction == "minimize" ? qtune::Direction::kMinimize : qtune::Direction::kMaximize;
  if (a.kind == "random_smooth") {
    qtune::save_tabular(a.out, qtune::Surface::random_smooth(std::move(space), a.seed, a.smoothness, dir));
  } else {
    if (a.optimum.empty()) throw qtune::ArgumentError("quadratic surfaces need --optimum");
    const qtune::Configuration opt{a.optimum};
    qtune::save_tabular(a.out, qtune::Surface::quadratic(std::move(space), opt, a.curvature, dir).materialize());
  }
  return 0;
}

int best_of_file(const std::string& path) {
  const auto surface = qtune::load_tabular(path);
  const auto best = qtune::best_of(surface);
  nlohmann::json j;
  j["flat_index"] = best.flat_index;
  j["config"] = best.config.indices;
  j["config_text"] = surface.space().describe(best.config);
  j["metric"] = best.metric;
  j["score"] = best.score;
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtune: hyperparameter search as a Markov decision process"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Suppress warnings and progress messages");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned parallel = 1;
  auto* run = app.add_subcommand("run", "Run the agents declared in an experiment file");
  run->add_option("config", config_path, "Experiment file")->required();
  run->add_option("--seed", seed, "Run this single seed instead of the configured list");
  run->add_option("--out", out, "Output directory (default: config 'output', then $QTUNE_OUT_DIR)");
  run->add_option("--parallel", parallel, "Number of runs to execute concurrently")->check(CLI::Range(1u, 1024u));

  GenSurfaceArgs gen;
  auto* gs = app.add_subcommand("gen-surface", "Materialize a synthetic surface as a tabular file");
  gs->add_option("--preset", gen.preset, "lstm_grid or cnn_grid");
  gs->add_option("--dim", gen.dims, "Dimension as name:encoding:v1,v2,... (repeatable)");
  gs->add_option("--kind", gen.kind, "random_smooth or quadratic")
      ->check(CLI::IsMember({"random_smooth", "quadratic"}));
  gs->add_option("--seed", gen.seed, "Noise seed (random_smooth)");
  gs->add_option("--smoothness", gen.smoothness, "Kernel width (random_smooth)")->check(CLI::PositiveNumber);
  gs->add_option("--curvature", gen.curvature, "Curvature (quadratic)")->check(CLI::PositiveNumber);
  gs->add_option("--optimum", gen.optimum, "Optimum value indices (quadratic)")->delimiter(',');
  gs->add_option("--direction", gen.direction, "maximize or minimize")
      ->check(CLI::IsMember({"maximize", "minimize"}));
  gs->add_option("--out", gen.out, "Output file")->required();

  std::string compare_dir;
  double within = 0.01;
  auto* cmp = app.add_subcommand("compare", "Summarize the runs in an output directory");
  cmp->add_option("dir", compare_dir, "Directory holding *.summary.json files")->required();
  cmp->add_option("--within", within, "Relative distance to the optimum counted as a hit")
      ->check(CLI::Range(0.0, 1.0));

  std::string surface_path;
  auto* best = app.add_subcommand("best-of", "Print the best cell of a tabular surface");
  best->add_option("surface", surface_path, "Tabular surface file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  qtune::set_quiet(quiet);

  try {
    if (*run) {
      const auto config = qtune::load_experiment(config_path);
      qtune::RunOptions opts;
      opts.seed = seed;
      if (out) opts.output = *out;
      opts.parallel = parallel;
      const auto artifacts = qtune::run_experiment(config, opts);
      for (const auto& a : artifacts) std::cout << a.trace_path.string() << '\n';
      return 0;
    }
    if (*gs) return gen_surface(gen);
    if (*cmp) {
      std::cout << qtune::compare_runs(compare_dir, within).to_text();
      return 0;
    }
    if (*best) return best_of_file(surface_path);
  } catch (const qtune::ParseError& e) {
    std::cerr << "qtune: " << e.what() << '\n';
    return kExitInput;
  } catch (const qtune::IntegrityError& e) {
    std::cerr << "qtune: " << e.what() << '\n';
    return kExitInput;
  } catch (const qtune::SpaceError& e) {
    std::cerr << "qtune: " << e.what() << '\n';
    return *gs || *best ? kExitInput : kExitRuntime;
  } catch (const qtune::ArgumentError& e) {
    std::cerr << "qtune: " << e.what() << '\n';
    return *gs ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "qtune: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
