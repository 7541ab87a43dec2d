// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes. Tolerances and time limits are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

#include "oracles.hpp"
#include "qtune/agents.hpp"
#include "qtune/experiment.hpp"
#include "qtune/io.hpp"
#include "qtune/log.hpp"
#include "qtune/qtable.hpp"

using namespace qtune;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SearchSpace line_space(std::size_t n, Encoding enc) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(std::to_string(i));
  return SearchSpace({Dimension::of("x", v, enc)});
}

// 1. Tabular Q-learning reaches value-iteration Q* on a random finite MDP.
Outcome tabular_oracle() {
  constexpr double kGamma = 0.8;
  constexpr double kTol = 1e-2;
  constexpr int kSteps = 200000;
  const auto mdp = oracle::random_mdp(5, 3, 2024);
  const auto qstar = oracle::value_iteration(mdp, kGamma);
  QTable t;
  Rng rng(7);
  const std::vector<QTable::ActionKey> acts = {0, 1, 2};
  std::vector<std::vector<double>> visits(5, std::vector<double>(3, 0.0));
  std::uint64_t s = 0;
  for (int step = 0; step < kSteps; ++step) {
    const auto a = rng.uniform_index(3);
    double u = rng.uniform01();
    std::uint64_t next = 4;
    for (std::uint64_t k = 0; k < 5; ++k) {
      if (u < mdp.P[s][a][k]) {
        next = k;
        break;
      }
      u -= mdp.P[s][a][k];
    }
    const double alpha = 1.0 / std::pow(visits[s][a] += 1.0, 0.7);
    tabular_update(t, s, a, mdp.R[s][a], next, acts, alpha, kGamma);
    s = next;
  }
  double err = 0.0;
  for (std::uint64_t x = 0; x < 5; ++x) {
    for (std::uint64_t a = 0; a < 3; ++a) err = std::max(err, std::abs(t.get(x, a) - qstar[x][a]));
  }
  return {err < kTol, fmt("sup-norm error %.2e (limit 1e-2)", err)};
}

// 2. Bellman arithmetic identities.
Outcome bellman_arithmetic() {
  QTable t;
  t.set(0, 0, 0.5);
  t.set(1, 0, 0.8);
  t.set(1, 1, 0.2);
  const std::vector<QTable::ActionKey> next = {0, 1};
  const double q = tabular_update(t, 0, 0, 1.0, 1, next, 0.1, 0.9);
  const bool worked = std::abs(q - 0.622) <= 1e-12;

  QTable z;
  z.set(0, 0, 0.37);
  const bool alpha0 = tabular_update(z, 0, 0, 9.0, 1, next, 0.0, 0.9) == 0.37;

  const auto sp = line_space(3, Encoding::kOneHot);
  const ActionTable actions(sp);
  const QNetwork net(sp.encoded_width(), QNetworkOptions{{8}, Activation::kRelu, 1});
  const std::vector<double> s(net.state_size(), 0.3);
  const bool terminal = target_value(0.4, 0.9, s, actions, net, true) == 0.4;
  QTable fresh;
  const bool terminal_tab = tabular_update(fresh, 0, 0, 1.0, 1, {}, 1.0, 0.9) == 1.0;
  return {worked && alpha0 && terminal && terminal_tab,
          fmt("update=%.15f alpha0=%g terminal_net=%g terminal_table=%g", q, alpha0, terminal, terminal_tab)};
}

// 3. Analytic gradients against central differences over 20 seeds.
Outcome gradient_check() {
  constexpr double kH = 1e-5;
  constexpr double kTol = 1e-4;
  constexpr double kFloor = 1e-7;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto act = seed % 2 ? Activation::kTanh : Activation::kRelu;
    Mlp net({5, 8, 6, 1}, act, seed);
    for (auto& p : net.params()) p += rng.uniform(-0.05, 0.05);
    std::vector<TrainingExample> batch(4);
    for (auto& ex : batch) {
      ex.input.resize(5);
      for (auto& x : ex.input) x = rng.uniform(-1, 1);
      ex.target = rng.uniform(-1, 1);
    }
    std::vector<double> grad;
    net.loss_and_gradient(batch, grad);
    const auto num = oracle::numeric_gradient(net, batch, kH);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double denom = std::max({std::abs(grad[i]), std::abs(num[i]), kFloor});
      worst = std::max(worst, std::abs(grad[i] - num[i]) / denom);
    }
  }
  return {worst < kTol, fmt("max relative error %.2e over 20 seeds (limit 1e-4)", worst)};
}

// 4. Tabular Q-learning over single-dimension moves vs random search.
Outcome qi_vs_random() {
  constexpr std::uint64_t kBudget = 200;
  constexpr double kWithin = 0.01;
  std::vector<double> qi, rs;
  int qi_hits = 0, rs_hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = Surface::random_smooth(cnn_grid_space(), derive_seed(seed, Stream::kSurface),
                                          kDefaultSmoothness);
    const double opt = oracle::naive_best(s).second;
    QiConfig c;
    c.trials = kBudget;
    c.seed = seed;
    const double a = qi_optimize(s, c).best_metric;
    const double b = random_search(s, kBudget, seed).best_metric;
    qi.push_back(a);
    rs.push_back(b);
    qi_hits += a >= opt * (1.0 - kWithin);
    rs_hits += b >= opt * (1.0 - kWithin);
  }
  const double mq = median(qi), mr = median(rs);
  return {mq >= mr && qi_hits >= rs_hits,
          fmt("median qi %.4f vs random %.4f; within 1%%: qi %g/20 vs random %g/20", mq, mr, qi_hits, rs_hits)};
}

// 5. Hyp-RL end-to-end on a 10-cell toy surface.
Outcome hyprl_smoke() {
  const auto sp = line_space(10, Encoding::kOneHot);
  const auto s = Surface::quadratic(sp, Configuration{{6}}, 1.0);
  MetaFeatures mf;
  mf.values = {2, 1, 10, 0, 2, 0, 1, 0};
  // Top 10% of 10 cells is the single best cell.
  std::vector<double> all;
  for (std::uint64_t k = 0; k < sp.cardinality(); ++k) all.push_back(s.score_flat(k));
  std::sort(all.begin(), all.end(), std::greater<>());
  const double cutoff = all[0];
  int hits = 0;
  int rs_hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    HypRLConfig c;
    c.episodes_per_dataset = 200;
    c.actions_per_episode = 5;
    c.epsilon_start = 1.0;
    c.epsilon_end = 0.05;
    c.epsilon_decay_episodes = 200;
    c.seed = seed;
    const TrainingSurface ts{s, mf};
    const auto trained = hyprl_train(std::span(&ts, 1), c);
    const auto found = hyprl_find_optimal(trained.network, mf, sp, 5, &s);
    hits += s.score(found) >= cutoff;
    rs_hits += random_search(s, c.evaluation_budget(1), seed).best_metric >= cutoff;
  }
  return {hits >= 8, fmt("top-10%% cell found in %g/10 seeds (need 8); random search at 1000 evals: %g/10", hits,
                         rs_hits)};
}

// 6. Termination properties under fuzzed agent parameters.
Outcome termination() {
  Rng rng(606);
  int violations = 0;
  MetaFeatures mf;
  // Frozen greedy episodes end exactly at the first consecutive repeat.
  for (int i = 0; i < 100; ++i) {
    const auto sp = line_space(2 + rng.uniform_index(15), Encoding::kOneHot);
    const auto s = Surface::random_smooth(sp, rng.next_u64(), 0.5);
    const QNetwork net(sp.encoded_width(), QNetworkOptions{{8}, Activation::kTanh, rng.next_u64()});
    const std::uint64_t T = 1 + rng.uniform_index(30);
    Rng prng(i);
    const auto ep = hyprl_rollout(net, s, mf, EpsilonGreedy{0.0}, T, prng);
    const auto& a = ep.actions;
    if (a.size() > T) ++violations;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) violations += a[k] == a[k - 1];
    if (a.size() < T && (a.size() < 2 || a[a.size() - 1] != a[a.size() - 2])) ++violations;
  }
  // Training episodes never exceed T.
  for (int i = 0; i < 100; ++i) {
    const auto sp = line_space(2 + rng.uniform_index(10), Encoding::kOneHot);
    const auto s = Surface::random_smooth(sp, rng.next_u64(), 0.5);
    HypRLConfig c;
    c.episodes_per_dataset = 1 + rng.uniform_index(8);
    c.actions_per_episode = 1 + rng.uniform_index(8);
    c.minibatch_size = 1 + rng.uniform_index(8);
    c.buffer_capacity = 1 + rng.uniform_index(20);
    c.target_update_every = 1 + rng.uniform_index(5);
    c.epsilon_start = rng.uniform01();
    c.epsilon_end = rng.uniform01();
    c.epsilon_decay_episodes = rng.uniform_index(5);
    c.gamma = rng.uniform(0.0, 0.99);
    c.network.hidden = {4};
    c.seed = rng.next_u64();
    const TrainingSurface ts{s, mf};
    const auto r = hyprl_train(std::span(&ts, 1), c);
    if (r.search.trace.size() > c.evaluation_budget(1)) ++violations;
    std::uint64_t len = 0, ep = 0;
    for (const auto& rec : r.search.trace.records) {
      if (rec.episode != ep) ep = rec.episode, len = 0;
      violations += ++len > c.actions_per_episode;
    }
  }
  // Qi never exceeds N evaluations.
  for (int i = 0; i < 100; ++i) {
    const auto s = Surface::random_smooth(cnn_grid_space(), rng.next_u64(), rng.uniform(0.05, 2.0));
    QiConfig c;
    c.trials = 1 + rng.uniform_index(300);
    c.alpha = rng.uniform01();
    c.gamma = rng.uniform01();
    c.change_threshold = rng.uniform(0.0, 0.2);
    c.break_rule = rng.uniform01() < 0.5 ? QiBreakRule::kOnChange : QiBreakRule::kOnStable;
    c.policy = rng.uniform01() < 0.5 ? PolicyConfig{EpsilonGreedy{rng.uniform01()}}
                                     : PolicyConfig{Softmax{rng.uniform(0.01, 2.0)}};
    c.seed = rng.next_u64();
    const auto r = qi_optimize(s, c);
    violations += r.evaluations > c.trials || r.trace.size() > c.trials;
  }
  return {violations == 0, fmt("%g violations over 300 fuzzed runs", violations)};
}

// 7. Replay buffer capacity, FIFO order and uniform sampling.
Outcome replay_buffer() {
  ReplayBuffer<int> b(100);
  bool ok = true;
  for (int i = 0; i < 10000; ++i) {
    b.push(i);
    ok &= b.size() <= 100 && b[0] == std::max(0, i - 99) && b[b.size() - 1] == i;
  }
  ReplayBuffer<int> ten(10);
  for (int i = 0; i < 10; ++i) ten.push(i);
  Rng rng(77);
  const std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(10, 0);
  for (auto x : ten.sample(n, rng)) ++counts[static_cast<std::size_t>(x)];
  const double chi = oracle::chi_square(counts, std::vector<double>(10, 0.1), n);
  return {ok && chi < oracle::kChiSquare99[9],
          fmt("fifo=%g chi-square %.2f (99%% critical 21.666, df 9)", ok, chi)};
}

// 8. Policy distributions and invariances.
Outcome policies() {
  Rng rng(88);
  const std::uint64_t n = 100000;
  const std::vector<double> q5 = {0.3, -1.0, 2.0, 0.0, 0.7};
  std::vector<std::uint64_t> counts(5, 0);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[select(EpsilonGreedy{1.0}, q5, rng)];
  const double chi = oracle::chi_square(counts, std::vector<double>(5, 0.2), n);

  const std::vector<double> q2 = {1.0, 2.0};
  std::uint64_t ones = 0;
  for (std::uint64_t i = 0; i < n; ++i) ones += select(Softmax{1.0}, q2, rng);
  const double p1 = static_cast<double>(ones) / static_cast<double>(n);

  bool invariant = true;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> q(6), shifted(6);
    const double c = rng.uniform(-10, 10);
    for (std::size_t i = 0; i < 6; ++i) shifted[i] = (q[i] = rng.uniform(-1, 1)) + c;
    invariant &= argmax(q) == argmax(shifted);
    Rng r1(t), r2(t);
    invariant &= select(EpsilonGreedy{0.0}, q, r1) == select(EpsilonGreedy{0.0}, shifted, r2);
    const auto a = action_probabilities(Softmax{0.5}, q);
    const auto b = action_probabilities(Softmax{0.5}, shifted);
    for (std::size_t i = 0; i < 6; ++i) invariant &= std::abs(a[i] - b[i]) <= 1e-12;
  }
  const bool ok = chi < oracle::kChiSquare99[4] && std::abs(p1 - 0.7311) <= 0.01 &&
                  std::abs((1.0 - p1) - 0.2689) <= 0.01 && invariant;
  return {ok, fmt("uniform chi-square %.2f (crit 13.277); softmax p=[%.4f, %.4f]; invariance=%g", chi, 1.0 - p1, p1,
                  invariant)};
}

// 9. Grid identities.
Outcome grid_identities() {
  const bool card = lstm_grid_space().cardinality() == 3ull * 3 * 3 * 3 * 2 * 3 * 2 * 3 &&
                    cnn_grid_space().cardinality() == 4ull * 4 * 3 * 4 * 5 * 4;
  int mismatches = 0;
  std::vector<Surface> surfaces = {
      Surface::random_smooth(cnn_grid_space(), 7, kDefaultSmoothness),
      Surface::random_smooth(lstm_grid_space(), 3, 0.3, Direction::kMinimize),
      Surface::quadratic(cnn_grid_space(), Configuration{{3, 1, 2, 0, 4, 2}}, 1.0),
      Surface::quadratic(lstm_grid_space(), Configuration{{1, 1, 1, 1, 1, 1, 1, 1}}, 2.0, Direction::kMinimize),
      Surface::tabular(line_space(3, Encoding::kOneHot), {0.2, 0.9, 0.9}),
  };
  for (const auto& s : surfaces) {
    const auto g = grid_search(s);
    const auto b = best_of(s);
    const auto naive = oracle::naive_best(s);
    mismatches += !(g.best_config == b.config) || g.best_metric != b.score || b.flat_index != naive.first;
  }
  return {card && mismatches == 0,
          fmt("cardinalities %g/%g; grid_search vs best_of mismatches %g of 5",
              static_cast<double>(lstm_grid_space().cardinality()),
              static_cast<double>(cnn_grid_space().cardinality()), mismatches)};
}

// 10. End-to-end reproducibility of trace files.
Outcome reproducibility() {
  const std::string cfg =
      "spec_version = 1\n"
      "space.preset = cnn_grid\n"
      "surface.kind = random_smooth\n"
      "agents = qi, random, hyprl\n"
      "budget = 200\n"
      "hyprl.episodes = 20\n"
      "hyprl.actions_per_episode = 5\n"
      "hyprl.hidden = 16\n"
      "seeds = 3, 4\n";
  const auto base = std::filesystem::temp_directory_path() / ("qtune-accept-" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  const auto c = parse_experiment(cfg, ".");
  RunOptions a, b;
  a.output = base / "a";
  b.output = base / "b";
  b.parallel = 3;
  const auto x = run_experiment(c, a);
  const auto y = run_experiment(c, b);
  int identical = 0;
  for (std::size_t i = 0; i < x.size(); ++i) identical += read_file(x[i].trace_path) == read_file(y[i].trace_path);
  std::filesystem::remove_all(base);
  return {identical == static_cast<int>(x.size()),
          fmt("%g of %g trace files byte-identical", identical, static_cast<double>(x.size()))};
}

}  // namespace

int main() {
  set_quiet(true);
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "tabular Q-learning matches value iteration", 30.0, tabular_oracle},
      {2, "Bellman update arithmetic", 0.0, bellman_arithmetic},
      {3, "MLP gradient check", 0.0, gradient_check},
      {4, "qi_optimize vs random search on random-smooth surfaces", 120.0, qi_vs_random},
      {5, "Hyp-RL end-to-end toy", 300.0, hyprl_smoke},
      {6, "termination properties", 0.0, termination},
      {7, "replay buffer", 0.0, replay_buffer},
      {8, "policy distributions", 0.0, policies},
      {9, "grid identities", 0.0, grid_identities},
      {10, "reproducibility", 0.0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += fmt(" [over time limit %.0f s]", c.limit_s);
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
