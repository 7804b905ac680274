#include "rldf/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rldf/config.hpp"
#include "rldf/error.hpp"
#include "rldf/harness.hpp"
#include "rldf/io.hpp"

namespace rldf {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--set", o.overrides, "Override a field, KEY=VALUE (repeatable)")->take_all();
  cmd->add_option("--seed", o.seed, "Seed for every section (applied before --set)");
  cmd->add_option("--out", o.out, "Output directory (default: output_dir from the config)");
}

RunConfiguration load(const CommonOptions& o) {
  return load_run_configuration(o.config, o.overrides, o.seed);
}

fs::path output_dir(const CommonOptions& o, const RunConfiguration& cfg) {
  fs::path dir = o.out.empty() ? fs::path(cfg.output_dir) : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

void write_effective_config(const fs::path& dir, const RunConfiguration& cfg) {
  auto f = open_output(dir / "effective_config.json");
  f << cfg.to_json().dump(2) << '\n';
}

const Grammar& grammar_for(const std::string& grammar_path, const std::string& config_path,
                           std::optional<Grammar>& holder, std::optional<RunConfiguration>& cfg_holder) {
  if (!grammar_path.empty()) {
    if (!fs::exists(grammar_path)) throw ConfigError("grammar not found: " + grammar_path);
    holder = Grammar::load(grammar_path);
    return *holder;
  }
  if (!config_path.empty()) {
    cfg_holder = load_run_configuration(config_path);
    return *cfg_holder->grammar;
  }
  return default_grammar();
}

std::string fingerprint(const RunConfiguration& cfg) {
  auto doc = cfg.to_json();
  doc.erase("sweep");
  doc.erase("output_dir");
  doc.erase("verbosity");
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return fmt::format("{:016x}", h);
}

int cmd_train(const CommonOptions& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto dir = output_dir(o, cfg);
  write_effective_config(dir, cfg);

  const auto result = train(cfg);

  std::vector<StatisticsRow> rows;
  if (result.statistics) {
    rows.push_back({std::string(table_label(cfg.agent.algorithm)), cfg.reward.kind, cfg.agent.epsilon,
                    cfg.agent.seed, *result.statistics});
  }
  {
    auto f = open_output(dir / "statistics.csv");
    write_statistics_csv(f, rows);
  }
  {
    TrajectoryLog log;
    log.header = {std::string(to_string(cfg.agent.algorithm)), static_cast<int>(cfg.reward.kind), cfg.agent.epsilon,
                  cfg.agent.seed, cfg.environment.terminal_state, {}};
    for (const auto& a : cfg.grammar->axes()) log.header.axes.push_back(a.name);
    log.episodes = result.episodes;
    log.conv = result.statistics ? static_cast<int>(result.statistics->conv) : 0;
    log.oracle_calls = result.oracle_generations;
    auto f = open_output(dir / "trajectories.ndjson");
    write_trajectory_log(f, log);
  }
  {
    auto f = open_output(dir / "qtable.csv");
    write_qtable_csv(f, result.q, *cfg.grammar);
  }

  if (result.statistics) {
    out << fmt::format("conv={} d_t={} oracle_calls={}\n", format_number(result.statistics->conv),
                       format_number(result.statistics->d_t), result.oracle_generations);
  } else {
    out << fmt::format("no episodes run; oracle_calls={}\n", result.oracle_generations);
  }
  return kExitOk;
}

struct GridOptions {
  std::vector<std::string> agents;
  std::vector<std::string> rewards;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  int parallel = 0;
};

int cmd_sweep(const CommonOptions& o, const GridOptions& g, std::ostream& out, std::ostream& err) {
  auto cfg = load(o);
  SweepGrid grid = cfg.sweep;
  if (!g.agents.empty()) {
    grid.agents.clear();
    for (const auto& a : g.agents) grid.agents.push_back(algorithm_from_string(a));
  }
  if (!g.rewards.empty()) {
    grid.rewards.clear();
    for (const auto& r : g.rewards) grid.rewards.push_back(reward_kind_from_string(r));
  }
  if (!g.epsilons.empty()) grid.epsilons = g.epsilons;
  if (!g.seeds.empty()) grid.seeds = g.seeds;
  else if (o.seed) grid.seeds = {*o.seed};
  if (grid.empty()) {
    throw ConfigError("sweep grid is empty; set sweep.agents, sweep.rewards, sweep.epsilons and sweep.seeds "
                      "in the config or pass --agents/--rewards/--epsilons/--seeds");
  }
  grid.validate();
  cfg.sweep = grid;
  cfg.validate();

  const auto dir = output_dir(o, cfg);
  write_effective_config(dir, cfg);

  const auto total = expand_grid(grid).size();
  std::atomic<std::size_t> finished{0};
  SweepOptions options;
  options.parallel = g.parallel;
  options.checkpoint_dir = dir / "cells";
  options.fingerprint = fingerprint(cfg);
  options.on_done = [&](const CellResult& r) {
    const auto k = ++finished;
    std::string status;
    if (!r.ok()) {
      status = "FAILED: " + r.error;
    } else if (r.statistics) {
      status = fmt::format("d_t={} conv={} oracle_calls={}", format_number(r.statistics->d_t),
                           format_number(r.statistics->conv), format_number(r.statistics->oracle_calls));
    } else {
      status = "no episodes";
    }
    err << fmt::format("[{}/{}] {} reward={} eps={} seed={}{} {}\n", k, total, table_label(r.cell.agent),
                       static_cast<int>(r.cell.reward), format_number(r.cell.epsilon), r.cell.seed,
                       r.resumed ? " (resumed)" : "", status);
  };
  const auto results = run_sweep(cfg, grid, options);

  std::vector<StatisticsRow> rows;
  int failure_code = kExitOk;
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failures;
      if (failure_code == kExitOk) failure_code = r.error_code;
      continue;
    }
    if (r.statistics) {
      rows.push_back({std::string(table_label(r.cell.agent)), r.cell.reward, r.cell.epsilon, r.cell.seed,
                      *r.statistics});
    }
  }
  {
    auto f = open_output(dir / "statistics.csv");
    write_statistics_csv(f, rows);
  }
  {
    auto f = open_output(dir / "sweep_summary.csv");
    write_summary_csv(f, aggregate(results));
  }
  const auto failures_path = dir / "sweep_failures.csv";
  if (failures > 0) {
    auto f = open_output(failures_path);
    write_failures_csv(f, results);
  } else {
    fs::remove(failures_path);
  }
  out << fmt::format("cells={} rows={} failed={}\n", results.size(), rows.size(), failures);
  return failure_code;
}

int cmd_ndg(const CommonOptions& o, const std::vector<int>& start_coords, std::ostream& out) {
  const auto cfg = load(o);
  std::optional<EncodedState> start;
  if (!start_coords.empty()) {
    start = EncodedState{start_coords};
    cfg.grammar->check(*start);
  }
  const auto dir = output_dir(o, cfg);
  write_effective_config(dir, cfg);

  const auto run = run_ndg(cfg, start);
  {
    auto f = open_output(dir / "ndg_result.json");
    f << to_json(run, *cfg.grammar).dump(2) << '\n';
  }
  {
    TrajectoryLog log;
    log.header = {"ndg", static_cast<int>(cfg.reward.kind), 0.0, cfg.ndg.seed, cfg.environment.terminal_state, {}};
    for (const auto& a : cfg.grammar->axes()) log.header.axes.push_back(a.name);
    log.episodes = {run.trajectory};
    log.conv = run.result.status == NdgStatus::reached_goal ? 1 : 0;
    log.oracle_calls = run.oracle_generations;
    auto f = open_output(dir / "ndg_trajectory.ndjson");
    write_trajectory_log(f, log);
  }
  out << fmt::format("status={} iterations={} final={} reward={} oracle_calls={}\n", to_string(run.result.status),
                     run.result.iterations, format_coords(run.result.final_state),
                     format_number(run.result.final_reward), run.oracle_generations);
  return kExitOk;
}

int cmd_dump_grammar(const std::string& grammar_path, const std::string& config_path, std::ostream& out) {
  std::optional<Grammar> g_holder;
  std::optional<RunConfiguration> c_holder;
  const Grammar& g = grammar_for(grammar_path, config_path, g_holder, c_holder);
  out << "axes: " << g.axis_count() << '\n';
  for (std::size_t i = 0; i < g.axis_count(); ++i) {
    const auto& axis = g.axis(i);
    out << fmt::format("  [{}] {} ({}, {} terms):", i, axis.name, to_string(axis.role), axis.size());
    for (int k = 0; k < axis.size(); ++k) out << (k == 0 ? " " : ", ") << k << '=' << axis.vocabulary[k];
    out << '\n';
    for (const auto& grp : axis.locality_groups) {
      out << fmt::format("      locality group [{}, {}]\n", grp.lo, grp.hi);
    }
  }
  out << "fixed terminals:";
  for (const auto& [k, v] : g.fixed_terminals()) out << ' ' << k << "=\"" << v << '"';
  out << '\n' << "production: S ->";
  for (const auto& sym : g.production()) out << ' ' << sym;
  out << '\n' << "states: " << g.state_count() << '\n';
  return kExitOk;
}

int cmd_decode(const std::string& grammar_path, const std::string& config_path,
               const std::vector<std::string>& coords, std::ostream& out) {
  std::optional<Grammar> g_holder;
  std::optional<RunConfiguration> c_holder;
  const Grammar& g = grammar_for(grammar_path, config_path, g_holder, c_holder);
  EncodedState s;
  for (const auto& arg : coords) {
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        s.coords.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("decode: '" + item + "' is not an integer coordinate");
      }
    }
  }
  out << decode(s, g).text << '\n';
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& out_dir, std::ostream& out) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw ConfigError("trajectory log not found: " + log_path);
  const auto log = read_trajectory_log(in);
  const auto stats = replay_statistics(log);
  std::vector<StatisticsRow> rows;
  if (stats) {
    std::string label = log.header.agent == "ndg" ? "NDG" : std::string(table_label(algorithm_from_string(log.header.agent)));
    rows.push_back({label, reward_kind_from_string(std::to_string(log.header.reward)), log.header.epsilon,
                    log.header.seed, *stats});
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    auto f = open_output(fs::path(out_dir) / "statistics.csv");
    write_statistics_csv(f, rows);
  }
  write_statistics_csv(out, rows);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reinforcement learning over grammar-encoded prompts with diffusion feedback", "rldf"};
  app.require_subcommand(1);

  CommonOptions train_opts, sweep_opts, ndg_opts;
  GridOptions grid;
  std::vector<int> ndg_start;
  std::string grammar_path, config_for_grammar, decode_grammar, decode_config, replay_path, replay_out;
  std::vector<std::string> decode_coords;

  auto* train_cmd = app.add_subcommand("train", "Train one agent and write statistics, trajectories and Q-table");
  add_common(train_cmd, train_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run an agents x rewards x epsilons x seeds grid");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--agents", grid.agents, "Agents (q_learning, sarsa, random)")->delimiter(',');
  sweep_cmd->add_option("--rewards", grid.rewards, "Reward kinds (1, 2, 3 or names)")->delimiter(',');
  sweep_cmd->add_option("--epsilons", grid.epsilons, "Exploration rates")->delimiter(',');
  sweep_cmd->add_option("--seeds", grid.seeds, "Seeds")->delimiter(',');
  sweep_cmd->add_option("--parallel", grid.parallel, "Concurrent cells (default: available workers)")
      ->check(CLI::NonNegativeNumber);

  auto* ndg_cmd = app.add_subcommand("ndg", "Run the noisy diffusion gradient optimizer");
  add_common(ndg_cmd, ndg_opts);
  ndg_cmd->add_option("--start", ndg_start, "Start coordinates, comma separated")->delimiter(',');

  auto* dump_cmd = app.add_subcommand("dump-grammar", "Print the grammar and its state count");
  dump_cmd->add_option("--grammar", grammar_path, "Vocabulary file (default: built-in)");
  dump_cmd->add_option("--config", config_for_grammar, "Take the grammar from a run configuration");

  auto* decode_cmd = app.add_subcommand("decode", "Print the prompt of an encoded state");
  decode_cmd->add_option("coords", decode_coords, "Coordinates, one per axis")->required();
  decode_cmd->add_option("--grammar", decode_grammar, "Vocabulary file (default: built-in)");
  decode_cmd->add_option("--config", decode_config, "Take the grammar from a run configuration");

  auto* replay_cmd = app.add_subcommand("replay", "Recompute statistics from a trajectory log");
  replay_cmd->add_option("log", replay_path, "trajectories.ndjson")->required();
  replay_cmd->add_option("--out", replay_out, "Also write statistics.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int rc = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train_opts, out);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, grid, out, err);
    if (*ndg_cmd) return cmd_ndg(ndg_opts, ndg_start, out);
    if (*dump_cmd) return cmd_dump_grammar(grammar_path, config_for_grammar, out);
    if (*decode_cmd) return cmd_decode(decode_grammar, decode_config, decode_coords, out);
    if (*replay_cmd) return cmd_replay(replay_path, replay_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << '\n';
    if (!e.payload().empty()) err << "payload: " << e.payload() << '\n';
    return kExitOracle;
  } catch (const DegenerateEmbeddingError& e) {
    err << "oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitConfig;
}

}  // namespace rldf
