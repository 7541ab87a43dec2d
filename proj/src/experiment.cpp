#include "qtune/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <iomanip>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "qtune/io.hpp"
#include "qtune/log.hpp"

namespace qtune {
namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.emplace_back(trim(s.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

class Keys {
 public:
  explicit Keys(std::map<std::string, Entry> entries, std::size_t last_line)
      : entries_(std::move(entries)), last_line_(last_line) {}

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool has(const std::string& key) const { return find(key) != nullptr; }
  std::size_t line_of(const std::string& key) const {
    const auto* e = find(key);
    return e ? e->line : last_line_;
  }
  std::size_t last_line() const { return last_line_; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(line_of(key), key + ": " + what);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) const {
    const auto* e = find(key);
    if (!e) return fallback;
    return parse_u64(key, e->value, min);
  }

  std::uint64_t parse_u64(const std::string& key, std::string_view text, std::uint64_t min) const {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || text.empty()) {
      fail(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    if (v < min) fail(key, "must be at least " + std::to_string(min));
    return v;
  }

  double real(const std::string& key, double fallback, double lo, double hi, bool lo_open = false,
              bool hi_open = false) const {
    const auto* e = find(key);
    if (!e) return fallback;
    return parse_real(key, e->value, lo, hi, lo_open, hi_open);
  }

  double parse_real(const std::string& key, std::string_view text, double lo, double hi,
                    bool lo_open = false, bool hi_open = false) const {
    const auto v = Value::parse(text).number;
    if (!v || !std::isfinite(*v)) fail(key, "expected a finite number, got '" + std::string(text) + "'");
    const bool below = lo_open ? !(*v > lo) : !(*v >= lo);
    const bool above = hi_open ? !(*v < hi) : !(*v <= hi);
    if (below || above) {
      std::ostringstream os;
      os << "value " << text << " outside " << (lo_open ? '(' : '[') << lo << ", " << hi
         << (hi_open ? ')' : ']');
      fail(key, os.str());
    }
    return *v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(key, "expected true or false");
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<std::string_view> allowed) const {
    const auto* e = find(key);
    if (!e) return fallback;
    for (auto a : allowed) {
      if (e->value == a) return e->value;
    }
    std::string msg = "unknown value '" + e->value + "' (expected one of:";
    for (auto a : allowed) msg += " " + std::string(a);
    fail(key, msg + ")");
  }

 private:
  std::map<std::string, Entry> entries_;
  std::size_t last_line_;
};

const std::vector<std::string_view> kKnownKeys = {
    "spec_version",
    "space.preset",
    "surface.kind",
    "surface.path",
    "surface.direction",
    "surface.optimum",
    "surface.curvature",
    "surface.seed",
    "surface.smoothness",
    "surface.metafeatures",
    "agents",
    "budget",
    "policy",
    "epsilon",
    "temperature",
    "qi.alpha",
    "qi.gamma",
    "qi.change_threshold",
    "qi.break_rule",
    "hyprl.gamma",
    "hyprl.target_update_every",
    "hyprl.buffer_capacity",
    "hyprl.episodes",
    "hyprl.actions_per_episode",
    "hyprl.epsilon_start",
    "hyprl.epsilon_end",
    "hyprl.epsilon_decay_episodes",
    "hyprl.minibatch_size",
    "hyprl.learning_rate",
    "hyprl.hidden",
    "hyprl.activation",
    "hyprl.find_iters",
    "hyprl.checkpoint",
    "seed",
    "seeds",
    "output",
    "trace.timing",
};

std::string file_stem(AgentKind agent, std::uint64_t seed) {
  return std::string(agent_name(agent)) + "-seed" + std::to_string(seed);
}

nlohmann::json indices_json(const Configuration& c) {
  auto arr = nlohmann::json::array();
  for (auto i : c.indices) arr.push_back(i);
  return arr;
}

}  // namespace

std::string_view agent_name(AgentKind a) {
  switch (a) {
    case AgentKind::kQi: return "qi";
    case AgentKind::kRandom: return "random";
    case AgentKind::kGrid: return "grid";
    case AgentKind::kHypRL: return "hyprl";
  }
  return "?";
}

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::vector<std::pair<Dimension, std::size_t>> dims;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    if (value.empty()) throw ConfigError(line_no, key + ": missing value");
    if (key == "space.dim") {
      try {
        dims.emplace_back(Dimension::parse_spec(value), line_no);
      } catch (const SpaceError& e) {
        throw ConfigError(line_no, std::string("space.dim: ") + e.what());
      }
      continue;
    }
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
    if (entries.contains(key)) {
      throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line " +
                                     std::to_string(entries[key].line) + ")");
    }
    entries.emplace(key, Entry{value, line_no});
  }
  const Keys keys(std::move(entries), std::max<std::size_t>(line_no - 1, 1));

  if (!keys.has("spec_version")) {
    throw ConfigError(keys.last_line(), "missing required key 'spec_version' (expected 1)");
  }
  if (keys.find("spec_version")->value != "1") keys.fail("spec_version", "unsupported version (expected 1)");

  ExperimentConfig cfg;

  // Space.
  if (keys.has("space.preset") && !dims.empty()) {
    throw ConfigError(dims.front().second, "space.dim cannot be combined with space.preset");
  }
  if (keys.has("space.preset")) {
    const auto preset = keys.choice("space.preset", "", {"lstm_grid", "cnn_grid"});
    cfg.space = preset == "lstm_grid" ? lstm_grid_space() : cnn_grid_space();
  } else if (!dims.empty()) {
    std::vector<Dimension> list;
    for (auto& [d, line] : dims) {
      for (const auto& prev : list) {
        if (prev.name() == d.name()) throw ConfigError(line, "space.dim: duplicate dimension '" + d.name() + "'");
      }
      list.push_back(d);
    }
    cfg.space = SearchSpace(std::move(list));
  }

  // Surface.
  if (!keys.has("surface.kind")) throw ConfigError(keys.last_line(), "missing required key 'surface.kind'");
  const auto kind = keys.choice("surface.kind", "", {"tabular", "quadratic", "random_smooth"});
  auto& sd = cfg.surface;
  sd.kind = kind == "tabular"     ? SurfaceDecl::Kind::kTabular
            : kind == "quadratic" ? SurfaceDecl::Kind::kQuadratic
                                  : SurfaceDecl::Kind::kRandomSmooth;
  auto forbid = [&](const char* key) {
    if (keys.has(key)) keys.fail(key, "not used by surface.kind = " + kind);
  };
  if (sd.kind == SurfaceDecl::Kind::kTabular) {
    for (auto k : {"surface.direction", "surface.optimum", "surface.curvature", "surface.seed",
                   "surface.smoothness"}) {
      forbid(k);
    }
    if (!keys.has("surface.path")) keys.fail("surface.kind", "tabular surfaces need surface.path");
    sd.path = base_dir / keys.find("surface.path")->value;
    try {
      cfg.tabular = load_tabular(sd.path);
    } catch (const Error& e) {
      keys.fail("surface.path", sd.path.string() + ": " + e.what());
    }
    if (cfg.space && !(cfg.tabular->space() == *cfg.space)) {
      keys.fail("surface.path", "file space does not match the declared space");
    }
    cfg.space = cfg.tabular->space();
  } else {
    forbid("surface.path");
    if (!cfg.space) throw ConfigError(keys.line_of("surface.kind"), "synthetic surfaces need a declared space");
    sd.direction = keys.choice("surface.direction", "maximize", {"maximize", "minimize"}) == "maximize"
                       ? Direction::kMaximize
                       : Direction::kMinimize;
    if (sd.kind == SurfaceDecl::Kind::kQuadratic) {
      forbid("surface.seed");
      forbid("surface.smoothness");
      if (!keys.has("surface.optimum")) keys.fail("surface.kind", "quadratic surfaces need surface.optimum");
      Configuration opt;
      for (const auto& item : split_list(keys.find("surface.optimum")->value)) {
        opt.indices.push_back(static_cast<std::size_t>(keys.parse_u64("surface.optimum", item, 0)));
      }
      try {
        cfg.space->validate(opt);
      } catch (const SpaceError& e) {
        keys.fail("surface.optimum", e.what());
      }
      sd.optimum = std::move(opt);
      sd.curvature = keys.real("surface.curvature", 1.0, 0.0, 1e300, true);
    } else {
      forbid("surface.optimum");
      forbid("surface.curvature");
      if (keys.has("surface.seed")) sd.seed = keys.u64("surface.seed", 0);
      sd.smoothness = keys.real("surface.smoothness", kDefaultSmoothness, 0.0, 1e300, true);
      if (cfg.space->cardinality() > kDeskScaleLimit) {
        keys.fail("surface.kind", "random_smooth needs a space of at most " +
                                      std::to_string(kDeskScaleLimit) + " cells");
      }
    }
  }
  if (keys.has("surface.metafeatures")) {
    std::vector<double> mf;
    for (const auto& item : split_list(keys.find("surface.metafeatures")->value)) {
      mf.push_back(keys.parse_real("surface.metafeatures", item, -1e300, 1e300));
    }
    if (mf.size() != MetaFeatures::kSize) keys.fail("surface.metafeatures", "expected 8 values");
    cfg.metafeatures = MetaFeatures::from_vector(mf);
  }

  // Agents.
  if (!keys.has("agents")) throw ConfigError(keys.last_line(), "missing required key 'agents'");
  for (const auto& name : split_list(keys.find("agents")->value)) {
    AgentKind a;
    if (name == "qi") a = AgentKind::kQi;
    else if (name == "random") a = AgentKind::kRandom;
    else if (name == "grid") a = AgentKind::kGrid;
    else if (name == "hyprl") a = AgentKind::kHypRL;
    else keys.fail("agents", "unknown agent '" + name + "' (expected qi, random, grid or hyprl)");
    if (std::find(cfg.agents.begin(), cfg.agents.end(), a) != cfg.agents.end()) {
      keys.fail("agents", "agent '" + name + "' listed twice");
    }
    cfg.agents.push_back(a);
  }
  const auto uses = [&](AgentKind a) { return std::find(cfg.agents.begin(), cfg.agents.end(), a) != cfg.agents.end(); };
  if (uses(AgentKind::kGrid) && cfg.space->cardinality() > kDeskScaleLimit) {
    keys.fail("agents", "grid search needs a space of at most " + std::to_string(kDeskScaleLimit) + " cells");
  }
  if (uses(AgentKind::kHypRL) && cfg.space->cardinality() > kDeskScaleLimit) {
    keys.fail("agents", "hyprl needs a space of at most " + std::to_string(kDeskScaleLimit) + " cells");
  }
  cfg.budget = keys.u64("budget", 200, 1);

  // Policy.
  const auto policy = keys.choice("policy", "epsilon_greedy", {"epsilon_greedy", "softmax"});
  if (policy == "epsilon_greedy") {
    if (keys.has("temperature")) keys.fail("temperature", "only used with policy = softmax");
    cfg.qi.policy = EpsilonGreedy{keys.real("epsilon", 0.3, 0.0, 1.0)};
  } else {
    if (keys.has("epsilon")) keys.fail("epsilon", "only used with policy = epsilon_greedy");
    const double t = keys.real("temperature", 0.1, 0.0, 1e300, true);
    cfg.qi.policy = Softmax{t};
    cfg.hyprl.softmax_temperature = t;
  }

  auto& qi = cfg.qi;
  qi.trials = cfg.budget;
  qi.alpha = keys.real("qi.alpha", qi.alpha, 0.0, 1.0);
  qi.gamma = keys.real("qi.gamma", qi.gamma, 0.0, 1.0);
  qi.change_threshold = keys.real("qi.change_threshold", qi.change_threshold, 0.0, 1e300);
  qi.break_rule = keys.choice("qi.break_rule", "on_change", {"on_change", "on_stable"}) == "on_change"
                      ? QiBreakRule::kOnChange
                      : QiBreakRule::kOnStable;

  auto& h = cfg.hyprl;
  h.gamma = keys.real("hyprl.gamma", h.gamma, 0.0, 1.0, false, true);
  h.target_update_every = keys.u64("hyprl.target_update_every", h.target_update_every, 1);
  h.buffer_capacity = keys.u64("hyprl.buffer_capacity", h.buffer_capacity, 1);
  h.episodes_per_dataset = keys.u64("hyprl.episodes", h.episodes_per_dataset, 1);
  h.actions_per_episode = keys.u64("hyprl.actions_per_episode", h.actions_per_episode, 1);
  h.epsilon_start = keys.real("hyprl.epsilon_start", h.epsilon_start, 0.0, 1.0);
  h.epsilon_end = keys.real("hyprl.epsilon_end", h.epsilon_end, 0.0, 1.0);
  h.epsilon_decay_episodes = keys.u64("hyprl.epsilon_decay_episodes", h.epsilon_decay_episodes);
  h.minibatch_size = keys.u64("hyprl.minibatch_size", h.minibatch_size, 1);
  h.learning_rate = keys.real("hyprl.learning_rate", h.learning_rate, 0.0, 1e300, true);
  if (keys.has("hyprl.hidden")) {
    h.network.hidden.clear();
    for (const auto& item : split_list(keys.find("hyprl.hidden")->value)) {
      h.network.hidden.push_back(static_cast<std::size_t>(keys.parse_u64("hyprl.hidden", item, 1)));
    }
  }
  const auto act = keys.choice("hyprl.activation", "relu", {"relu", "tanh", "identity"});
  h.network.activation = act == "relu" ? Activation::kRelu : act == "tanh" ? Activation::kTanh : Activation::kIdentity;
  cfg.hyprl_find_iters = keys.u64("hyprl.find_iters", cfg.hyprl_find_iters, 1);
  cfg.hyprl_checkpoint = keys.boolean("hyprl.checkpoint", false);

  // Runs.
  if (keys.has("seed") && keys.has("seeds")) keys.fail("seeds", "use either seed or seeds, not both");
  if (keys.has("seed")) cfg.seeds = {keys.u64("seed", 1)};
  if (keys.has("seeds")) {
    cfg.seeds.clear();
    for (const auto& item : split_list(keys.find("seeds")->value)) {
      const auto s = keys.parse_u64("seeds", item, 0);
      if (std::find(cfg.seeds.begin(), cfg.seeds.end(), s) != cfg.seeds.end()) {
        keys.fail("seeds", "seed " + item + " listed twice");
      }
      cfg.seeds.push_back(s);
    }
  }
  if (keys.has("output")) cfg.output = keys.find("output")->value;
  cfg.timing = keys.boolean("trace.timing", false);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(0, e.what());
  }
  return parse_experiment(text, path.parent_path());
}

Surface build_surface(const ExperimentConfig& config, std::uint64_t run_seed) {
  const auto& sd = config.surface;
  switch (sd.kind) {
    case SurfaceDecl::Kind::kTabular:
      if (config.tabular) return *config.tabular;
      return load_tabular(sd.path);
    case SurfaceDecl::Kind::kQuadratic:
      return Surface::quadratic(*config.space, *sd.optimum, sd.curvature, sd.direction);
    case SurfaceDecl::Kind::kRandomSmooth:
      return Surface::random_smooth(*config.space, sd.seed ? *sd.seed : derive_seed(run_seed, Stream::kSurface),
                                    sd.smoothness, sd.direction);
  }
  throw Error("build_surface: unknown surface kind");
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options) {
  if (options.output) return *options.output;
  if (config.output) return *config.output;
  if (const char* env = std::getenv("QTUNE_OUT_DIR"); env && *env) return env;
  return "qtune-out";
}

namespace {

RunArtifact run_one(const ExperimentConfig& config, AgentKind agent, std::uint64_t seed,
                    const std::filesystem::path& out_dir) {
  const Surface surface = build_surface(config, seed);
  const auto& space = surface.space();
  nlohmann::json summary;
  summary["agent"] = agent_name(agent);
  summary["seed"] = seed;

  OptimizeResult result;
  std::uint64_t setup_evaluations = 0;
  switch (agent) {
    case AgentKind::kRandom:
      result = random_search(surface, config.budget, seed);
      break;
    case AgentKind::kGrid:
      result = grid_search(surface);
      break;
    case AgentKind::kQi: {
      QiConfig qc = config.qi;
      qc.seed = seed;
      result = qi_optimize(surface, qc);
      setup_evaluations = 1;
      break;
    }
    case AgentKind::kHypRL: {
      HypRLConfig hc = config.hyprl;
      hc.seed = seed;
      const TrainingSurface ts{surface, config.metafeatures};
      auto trained = hyprl_train(std::span<const TrainingSurface>(&ts, 1), hc);
      const Configuration inferred =
          hyprl_find_optimal(trained.network, config.metafeatures, space, config.hyprl_find_iters, &surface);
      summary["inferred_config"] = indices_json(inferred);
      summary["inferred_config_text"] = space.describe(inferred);
      summary["inferred_metric"] = surface.score(inferred);
      if (config.hyprl_checkpoint) {
        const auto ckpt = out_dir / (file_stem(agent, seed) + ".qnet");
        std::ostringstream bytes;
        trained.network.save(bytes);
        write_file_atomic(ckpt, bytes.str());
        summary["checkpoint"] = ckpt.filename().string();
      }
      result = std::move(trained.search);
      break;
    }
  }

  // Agents count their own evaluations; this re-checks the contract from
  // the outside before anything is written.
  if (result.evaluations > result.budget || result.trace.size() > result.budget) {
    throw BudgetExceeded(std::string(agent_name(agent)) + ": " + std::to_string(result.trace.size()) +
                         " evaluations recorded against a budget of " + std::to_string(result.budget));
  }

  summary["best_config"] = indices_json(result.best_config);
  summary["best_config_text"] = space.describe(result.best_config);
  summary["best_metric"] = result.best_metric;
  summary["evaluations"] = result.evaluations;
  summary["setup_evaluations"] = setup_evaluations;
  summary["budget"] = result.budget;
  if (space.cardinality() <= kDeskScaleLimit) summary["optimum_metric"] = best_of(surface).score;
  summary["direction"] = direction_name(surface.direction());
  summary["surface"] = surface.provenance();

  const auto stem = file_stem(agent, seed);
  RunArtifact art{agent, seed, out_dir / (stem + ".trace.csv"), out_dir / (stem + ".summary.json")};
  summary["trace"] = art.trace_path.filename().string();
  write_file_atomic(art.trace_path, result.trace.to_csv(config.timing));
  write_file_atomic(art.summary_path, summary.dump() + "\n");
  return art;
}

}  // namespace

std::vector<RunArtifact> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto out_dir = resolve_output_dir(config, options);
  std::filesystem::create_directories(out_dir);
  const std::vector<std::uint64_t> seeds = options.seed ? std::vector{*options.seed} : config.seeds;

  struct Job {
    AgentKind agent;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto seed : seeds) {
    for (auto agent : config.agents) jobs.push_back({agent, seed});
  }

  std::vector<std::optional<RunArtifact>> done(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        done[i] = run_one(config, jobs[i].agent, jobs[i].seed, out_dir);
        log_info(std::string(agent_name(jobs[i].agent)) + " seed " + std::to_string(jobs[i].seed) + " done");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.parallel, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunArtifact> out;
  for (auto& d : done) out.push_back(*d);
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CompareReport compare_runs(const std::filesystem::path& dir, double within) {
  if (!std::filesystem::is_directory(dir)) throw Error("compare: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.ends_with(".summary.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("compare: no *.summary.json files in " + dir.string());

  struct Run {
    std::string agent;
    Trace trace;
    std::optional<double> optimum;
  };
  std::vector<Run> runs;
  for (const auto& f : files) {
    const auto text = read_file(f);
    const auto last = trim(std::string_view(text).substr(0, text.find_last_not_of("\n") + 1));
    const auto line = last.substr(last.rfind('\n') == std::string_view::npos ? 0 : last.rfind('\n') + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, f.string() + ": " + e.what());
    }
    if (!j.contains("agent") || !j.contains("trace")) throw ParseError(0, f.string() + ": missing agent or trace");
    Run r;
    r.agent = j["agent"].get<std::string>();
    std::ifstream is(dir / j["trace"].get<std::string>());
    if (!is) throw Error("compare: cannot open trace for " + f.string());
    r.trace = Trace::read_csv(is);
    if (r.trace.empty()) throw IntegrityError("compare: empty trace for " + f.string());
    if (j.contains("optimum_metric")) r.optimum = j["optimum_metric"].get<double>();
    runs.push_back(std::move(r));
  }

  CompareReport report;
  report.within = within;
  report.budget = runs.front().trace.size();
  for (const auto& r : runs) {
    if (r.trace.size() != report.budget) report.budgets_matched = false;
    report.budget = std::min<std::uint64_t>(report.budget, r.trace.size());
  }
  if (!report.budgets_matched) {
    log_warning("compare: runs have different evaluation counts; comparing at the minimum common budget of " +
                std::to_string(report.budget));
  }

  std::map<std::string, std::vector<const Run*>> by_agent;
  for (const auto& r : runs) by_agent[r.agent].push_back(&r);
  for (const auto& [agent, list] : by_agent) {
    AgentReport ar;
    ar.agent = agent;
    ar.runs = list.size();
    std::vector<double> best;
    std::size_t hits = 0;
    bool known = true;
    for (const auto* r : list) {
      const double b = r->trace.records[report.budget - 1].best_metric;
      best.push_back(b);
      if (!r->optimum) {
        known = false;
      } else if (b >= *r->optimum * (1.0 - within)) {
        ++hits;
      }
    }
    ar.median = quantile(best, 0.5);
    ar.q1 = quantile(best, 0.25);
    ar.q3 = quantile(best, 0.75);
    if (known) ar.within_fraction = static_cast<double>(hits) / static_cast<double>(list.size());
    report.agents.push_back(std::move(ar));
  }
  return report;
}

std::string CompareReport::to_text() const {
  std::ostringstream os;
  os << "budget " << budget << (budgets_matched ? "" : " (minimum common budget)") << '\n';
  const std::string within_col = "within" + format_double(within * 100.0) + "%";
  os << std::left << std::setw(8) << "agent" << std::right << std::setw(6) << "runs" << std::setw(10)
     << "median" << std::setw(10) << "q1" << std::setw(10) << "q3" << std::setw(10) << "iqr"
     << std::setw(12) << within_col << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& a : agents) {
    os << std::left << std::setw(8) << a.agent << std::right << std::setw(6) << a.runs << std::setw(10)
       << a.median << std::setw(10) << a.q1 << std::setw(10) << a.q3 << std::setw(10) << a.q3 - a.q1;
    if (a.within_fraction) {
      os << std::setw(12) << *a.within_fraction;
    } else {
      os << std::setw(12) << "n/a";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace qtune
