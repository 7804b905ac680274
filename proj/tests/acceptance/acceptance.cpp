// Acceptance run: one PASS/FAIL line per criterion.
//
//   rldf_acceptance            run every criterion
//   rldf_acceptance NAME...    run only the named criteria
//   rldf_acceptance --list     print the criterion names
//
// Exit status is 0 when every selected criterion passes, 1 otherwise.

#include <boost/math/distributions/binomial.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rldf/agents.hpp"
#include "rldf/cli.hpp"
#include "rldf/config.hpp"
#include "rldf/grammar.hpp"
#include "rldf/harness.hpp"
#include "rldf/io.hpp"
#include "rldf/ndg.hpp"
#include "rldf/random.hpp"
#include "rldf/rewards.hpp"
#include "rldf/value_iteration.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rldf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

const fs::path kSourceDir = RLDF_SOURCE_DIR;

EncodedState S(std::vector<int> c) { return EncodedState{std::move(c)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / fmt::format("rldf_acceptance_{}_{}", tag, Rng(std::random_device{}())())) {
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "rldf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (rc != 0) std::cerr << e.str();
  return rc;
}

json line_grammar(int n) {
  json vocab = json::array();
  for (int i = 0; i < n; ++i) vocab.push_back("s" + std::to_string(i));
  return {{"axes", {{{"name", "scene"}, {"role", "scene"}, {"vocabulary", vocab}}}}};
}

json default_terminal() { return {{"frequency", "two"}, {"noun", "dog"}, {"density", "few"}, {"scene", "park"}}; }

// Learned Q against value-iteration q* on a noiseless 5-state line.
Outcome q_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const json doc = {{"grammar", line_grammar(5)},
                    {"environment", {{"terminal", {4}}, {"terminal_stops_episode", true}}},
                    {"reward", {{"kind", "partial_semantic"}}},
                    {"agent",
                     {{"algorithm", "q_learning"},
                      {"epsilon", 0.1},
                      {"discount", 0.9},
                      {"learning_rate", {{"schedule", "visit_count"}}},
                      {"episodes", 2000},
                      {"seed", 0}}}};
  const auto cfg = RunConfiguration::from_json(doc);
  const auto result = train(cfg);
  SimulatedOracle oracle(cfg.grammar, cfg.oracle);
  Environment env(cfg.grammar, cfg.environment, oracle, cfg.reward);
  const auto model = build_model(env, oracle);
  const auto est = value_iteration(model, cfg.agent.discount, 1e-12);
  double sup = 0.0;
  for (std::size_t s = 0; s < model.states; ++s) {
    if (model.absorbing[s]) continue;  // terminal row is never updated
    for (std::size_t a = 0; a < model.actions; ++a) {
      sup = std::max(sup, std::abs(result.q.value(s, a) - est.q(s, a, model.actions)));
    }
  }
  const double secs = seconds_since(t0);
  return {sup <= 1e-2 && secs < 5.0, fmt::format("sup|Q - q*| = {:.4g} (bound 1e-2), {:.2f} s", sup, secs)};
}

// Greedy policy after 500 episodes follows shortest paths from random probes.
// Uniform exploration with full backups on the deterministic lattice; a
// discount of 0.7 keeps neighbouring action values apart within the budget.
Outcome greedy_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  const json doc = {{"grammar", json::parse(read_file(kSourceDir / "data" / "default_grammar.json"))},
                    {"environment", {{"terminal", default_terminal()}, {"terminal_stops_episode", false}}},
                    {"reward", {{"kind", "multi_semantic"}}},
                    {"agent",
                     {{"algorithm", "q_learning"},
                      {"epsilon", 1.0},
                      {"discount", 0.7},
                      {"learning_rate", {{"schedule", "constant"}, {"alpha", 1.0}}},
                      {"episodes", 500},
                      {"seed", 0}}}};
  const auto cfg = RunConfiguration::from_json(doc);
  const auto result = train(cfg);
  const Grammar& g = *cfg.grammar;
  const auto& terminal = cfg.environment.terminal_state;
  const auto terminal_index = g.index_of(terminal);

  Rng probes(mix_seed(0, 0x9B0BE5ULL));
  Rng ties(mix_seed(0, 0x71E5ULL));
  int optimal = 0;
  for (int k = 0; k < 30; ++k) {
    std::uint64_t i = uniform_index(probes, g.state_count() - 1);
    if (i >= terminal_index) ++i;
    const auto start = g.state_at(i);
    const int shortest = shortest_path_length(start, terminal, g);
    if (greedy_rollout_length(result.q, g, start, terminal, shortest, ties) == shortest) ++optimal;
  }
  const double secs = seconds_since(t0);
  return {optimal >= 28 && secs < 60.0, fmt::format("{}/30 probes optimal (need 28), {:.2f} s", optimal, secs)};
}

// Q (Partial-Semantic, eps 0.1) versus Random over 20 seeds, paired sign test.
Outcome epsilon_study() {
  const auto t0 = std::chrono::steady_clock::now();
  auto base = json::parse(read_file(kSourceDir / "configs" / "default_run.json"));
  base["grammar"] = json::parse(read_file(kSourceDir / "data" / "default_grammar.json"));
  base["reward"]["kind"] = "partial_semantic";
  base["agent"]["epsilon"] = 0.1;

  double sum_q = 0.0, sum_random = 0.0;
  int wins = 0, losses = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cfg = RunConfiguration::from_json(base);
    cfg.set_seed(seed);
    cfg.agent.algorithm = Algorithm::q_learning;
    const double q = train(cfg).statistics->d_t;
    cfg.agent.algorithm = Algorithm::random;
    const double r = train(cfg).statistics->d_t;
    sum_q += q;
    sum_random += r;
    wins += q < r;
    losses += q > r;
  }
  const int n = wins + losses;
  // One-sided: P(X >= wins) for X ~ Binomial(n, 1/2).
  const double p = n == 0 ? 1.0 : (wins == 0 ? 1.0 : boost::math::cdf(boost::math::complement(
                                                         boost::math::binomial(n, 0.5), wins - 1)));
  const double mean_q = sum_q / 20, mean_random = sum_random / 20;
  const double secs = seconds_since(t0);
  return {mean_q <= mean_random && p < 0.05,
          fmt::format("mean d_t Q={} Random={}, wins={} losses={} ties={}, sign-test p={:.4g} (need < 0.05), {:.2f} s",
                      mean_q, mean_random, wins, losses, 20 - n, p, secs)};
}

// Reward signs and cosine values.
Outcome reward_suite() {
  const RewardSpec spec;
  const GroundTruth gt{{"one banana"}, {"farm"}, {1.0, 0.0}};
  const auto obs = [](std::set<std::string> o, std::string s, std::vector<double> e) {
    return SemanticObservation{std::move(o), std::move(s), std::move(e)};
  };
  std::vector<std::string> failures;
  const auto check = [&](const char* what, double got, double want) {
    if (!(std::abs(got - want) <= 1e-9)) failures.push_back(fmt::format("{}: {} != {}", what, got, want));
  };
  check("multi match", multi_semantic_reward(obs({"one banana"}, "farm", {}), gt, spec), 1.5);
  check("multi mismatch", multi_semantic_reward(obs({"two dog"}, "park", {}), gt, spec), -0.5);
  check("multi empty objects", multi_semantic_reward(obs({}, "farm", {}), gt, spec), 0.5);
  check("partial +C_s", partial_semantic_reward(obs({}, "farm", {}), gt, spec), 0.5);
  check("partial -C_s", partial_semantic_reward(obs({"one banana"}, "park", {}), gt, spec), -0.5);
  const double h = 1.0 / std::sqrt(2.0);
  check("cosine identical", clip_reward(obs({}, "", {1.0, 0.0}), gt, spec), 1.0);
  check("cosine orthogonal", clip_reward(obs({}, "", {0.0, 1.0}), gt, spec), 0.0);
  check("cosine fixed pair", clip_reward(obs({}, "", {h, h}), gt, spec), std::sqrt(2.0) / 2.0);
  std::string detail = failures.empty() ? "8/8 values within 1e-9" : failures.front();
  return {failures.empty(), detail};
}

// encode(decode) identity, exhaustive on 2 axes and sampled on the default grammar.
Outcome grammar_round_trip() {
  int failures = 0, checked = 0;
  const auto small = Grammar::from_json({{"axes",
                                          {{{"name", "noun"}, {"vocabulary", {"a", "b", "c", "d", "e", "f"}}},
                                           {{"name", "scene"}, {"vocabulary", {"x", "y", "z", "w"}}}}}});
  const auto round_trip = [&](const Grammar& g, const EncodedState& s) {
    std::map<std::string, std::string> terms;
    for (std::size_t i = 0; i < g.axis_count(); ++i) terms[g.axis(i).name] = g.axis(i).vocabulary[s.coords[i]];
    ++checked;
    if (encode(terms, g) != s || decode(s, g).text.empty()) ++failures;
  };
  for (std::uint64_t i = 0; i < small.state_count(); ++i) round_trip(small, small.state_at(i));
  const auto g = Grammar::load((kSourceDir / "data" / "default_grammar.json").string());
  Rng rng(20240101);
  for (int k = 0; k < 10000; ++k) {
    EncodedState s;
    for (const auto& axis : g.axes()) s.coords.push_back(static_cast<int>(uniform_index(rng, axis.size())));
    round_trip(g, s);
  }
  return {failures == 0, fmt::format("{} states checked, {} failures", checked, failures)};
}

// d(park, vegetable garden) < d(park, train station platform).
Outcome locality_ordering() {
  const auto g = Grammar::load((kSourceDir / "data" / "default_grammar.json").string());
  const auto at = [&](const char* scene) {
    return encode({{"frequency", "one"}, {"noun", "banana"}, {"density", "no"}, {"scene", scene}}, g);
  };
  const int near = semantic_distance(at("park"), at("vegetable garden"));
  const int far = semantic_distance(at("park"), at("train station platform"));
  return {near < far, fmt::format("d(park, vegetable garden)={} d(park, train station platform)={}", near, far)};
}

// NDG on a smooth CLIP landscape and on flat Partial-Semantic object axes.
Outcome ndg() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(mix_seed(0, 0xD6ULL));
  const auto random_start = [&](const Grammar& g, const EncodedState& goal) {
    const auto goal_index = g.index_of(goal);
    std::uint64_t i = uniform_index(rng, g.state_count() - 1);
    if (i >= goal_index) ++i;
    return g.state_at(i);
  };

  // Smooth: default vocabulary, noiseless, locality bandwidth 4.
  json clip_doc = {{"grammar", json::parse(read_file(kSourceDir / "data" / "default_grammar.json"))},
                   {"environment", {{"terminal", default_terminal()}}},
                   {"oracle", {{"locality_bandwidth", 4.0}}},
                   {"reward", {{"kind", "clip"}}}};
  const auto clip_cfg = RunConfiguration::from_json(clip_doc);
  int clip_ok = 0;
  for (int k = 0; k < 20; ++k) {
    const auto start = random_start(*clip_cfg.grammar, clip_cfg.environment.terminal_state);
    const auto run = run_ndg(clip_cfg, start);
    if (run.result.status == NdgStatus::reached_goal &&
        static_cast<int>(run.result.trajectory.size()) ==
            semantic_distance(start, clip_cfg.environment.terminal_state)) {
      ++clip_ok;
    }
  }

  // Flat objects: only the scene term is rewarded; the goal scene sits in
  // the middle of a three-scene axis.
  json partial_doc = {
      {"grammar",
       {{"axes",
         {{{"name", "frequency"}, {"vocabulary", {"one", "two", "many"}}},
          {{"name", "noun"}, {"vocabulary", {"banana", "apple", "dog", "cat", "horse"}}},
          {{"name", "density"}, {"vocabulary", {"no", "one", "few", "many"}}},
          {{"name", "scene"}, {"vocabulary", {"vegetable garden", "park", "playground"}}}}}}},
      {"environment", {{"terminal", {1, 2, 2, 1}}}},
      {"reward", {{"kind", "partial_semantic"}}}};
  const auto partial_cfg = RunConfiguration::from_json(partial_doc);
  const auto& goal = partial_cfg.environment.terminal_state;
  int partial_ok = 0;
  for (int k = 0; k < 20; ++k) {
    const auto start = random_start(*partial_cfg.grammar, goal);
    const auto run = run_ndg(partial_cfg, start);
    auto expected = start;
    expected.coords[3] = goal.coords[3];
    if (run.result.status == NdgStatus::plateau && run.result.final_state.coords[3] == goal.coords[3] &&
        run.result.final_state == expected) {
      ++partial_ok;
    }
  }
  const double secs = seconds_since(t0);
  return {clip_ok == 20 && partial_ok == 20 && secs < 10.0,
          fmt::format("clip reached_goal with L1-length paths {}/20, partial plateau on goal scene {}/20, {:.2f} s",
                      clip_ok, partial_ok, secs)};
}

// Repeated train gives identical CSVs; replaying the log reproduces them.
Outcome determinism() {
  ScratchDir dir("determinism");
  const auto config = (kSourceDir / "configs" / "default_run.json").string();
  const auto a = dir.path() / "a", b = dir.path() / "b";
  if (cli({"train", "--config", config, "--out", a.string()}) != 0 ||
      cli({"train", "--config", config, "--out", b.string()}) != 0) {
    return {false, "train exited with an error"};
  }
  const auto first = read_file(a / "statistics.csv");
  const bool identical = !first.empty() && first == read_file(b / "statistics.csv");
  std::string replayed;
  if (cli({"replay", (a / "trajectories.ndjson").string()}, &replayed) != 0) return {false, "replay exited with an error"};
  const bool replay_matches = replayed == first;
  return {identical && replay_matches,
          fmt::format("statistics.csv byte-identical: {}, replay reproduces online statistics: {}",
                      identical ? "yes" : "no", replay_matches ? "yes" : "no")};
}

// The 3 x 3 x 2 grid emits 18 rows with the statistics columns.
Outcome sweep_shape() {
  ScratchDir dir("sweep");
  const auto config = (kSourceDir / "configs" / "standard_sweep.json").string();
  if (cli({"sweep", "--config", config, "--out", dir.path().string()}) != 0) return {false, "sweep exited with an error"};
  std::ifstream in(dir.path() / "statistics.csv");
  std::string header, line;
  std::getline(in, header);
  int rows = 0;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  std::string expected;
  for (const auto& c : statistics_columns()) expected += (expected.empty() ? "" : ",") + c;
  const bool columns = header == expected;
  return {rows == 18 && columns, fmt::format("{} rows (need 18), columns {}", rows, columns ? "match" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"q_convergence", q_convergence},   {"greedy_optimality", greedy_optimality},
      {"epsilon_study", epsilon_study},   {"reward_suite", reward_suite},
      {"grammar_round_trip", grammar_round_trip}, {"locality_ordering", locality_ordering},
      {"ndg", ndg},                       {"determinism", determinism},
      {"sweep_shape", sweep_shape},
  };

  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.size() == 1 && selected[0] == "--list") {
    for (const auto& c : criteria) std::cout << c.name << '\n';
    return 0;
  }
  for (const auto& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
      std::cerr << "unknown criterion: " << name << '\n';
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.name) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
