#include "rldf/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "rldf/error.hpp"
#include "rldf/io.hpp"
#include "rldf/random.hpp"

namespace rldf {

namespace {

constexpr std::uint64_t kAgentStream = 0xA9'E7'00'01ULL;

class Run {
 public:
  Run(const RunConfiguration& config, FeedbackOracle& backend)
      : config_(config),
        cache_(*config.grammar, backend),
        env_(config.grammar, config.environment, cache_, config.reward) {}

  CachedOracle& cache() { return cache_; }
  Environment& env() { return env_; }

  TrajectoryStep record(const EncodedState& from, std::size_t action, const StepOutcome& out) const {
    return {from,
            action,
            out.reward,
            digest(out.observation, env_.ground_truth()),
            out.next_state,
            semantic_distance(out.next_state, env_.config().terminal_state)};
  }

 private:
  const RunConfiguration& config_;
  CachedOracle cache_;
  Environment env_;
};

int error_code_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return 2;
  } catch (const OracleError&) {
    return 3;
  } catch (const DegenerateEmbeddingError&) {
    return 3;
  } catch (...) {
    return 4;
  }
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown failure";
  }
}

CellResult run_cell(const RunConfiguration& base, const SweepCell& cell, const SweepOptions& options) {
  CellResult result{cell, std::nullopt, {}, 0, false};
  try {
    const auto cfg = cell_configuration(base, cell);
    result.statistics = options.runner ? options.runner(cfg) : train(cfg).statistics;
  } catch (...) {
    const auto e = std::current_exception();
    result.error = message_of(e);
    result.error_code = error_code_of(e);
  }
  return result;
}

nlohmann::json cell_key(const SweepCell& c, const std::string& fingerprint) {
  return {{"fingerprint", fingerprint},
          {"ordinal", c.ordinal},
          {"agent", std::string(to_string(c.agent))},
          {"reward", static_cast<int>(c.reward)},
          {"epsilon", c.epsilon},
          {"seed", c.seed}};
}

std::optional<CellResult> load_checkpoint(const std::filesystem::path& file, const SweepCell& cell,
                                          const std::string& fingerprint) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("cell") != cell_key(cell, fingerprint)) return std::nullopt;
    CellResult r{cell, std::nullopt, {}, 0, true};
    if (!j.at("statistics").is_null()) r.statistics = statistics_from_json(j.at("statistics"));
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // partial or stale file: rerun the cell
  }
}

void save_checkpoint(const std::filesystem::path& dir, const CellResult& r, const std::string& fingerprint) {
  const nlohmann::json j = {{"cell", cell_key(r.cell, fingerprint)},
                            {"statistics", r.statistics ? to_json(*r.statistics) : nlohmann::json()}};
  const auto final_path = dir / (std::to_string(r.cell.ordinal) + ".json");
  const auto tmp_path = dir / (std::to_string(r.cell.ordinal) + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    out << j.dump() << '\n';
    if (!out) throw ConfigError("cannot write checkpoint " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

}  // namespace

int ObservationDigest::objects_matched() const noexcept { return std::popcount(objects_mask); }

ObservationDigest digest(const SemanticObservation& obs, const GroundTruth& gt) {
  ObservationDigest d;
  int bit = 0;
  for (const auto& object : gt.objects) {
    if (bit >= 64) throw InvariantError("digest: more than 64 target objects");
    if (obs.objects.count(object) != 0) d.objects_mask |= std::uint64_t{1} << bit;
    ++bit;
  }
  d.scene_matched = scene_matches(obs, gt);
  return d;
}

SemanticCounters fine_coarse_counters(const TrajectoryRecord& trajectory) {
  SemanticCounters c;
  for (const auto& s : trajectory.steps) {
    if (s.observation.objects_mask != 0) ++c.f_semantic;
    if (s.observation.scene_matched) ++c.c_semantic;
  }
  return c;
}

std::optional<RunStatistics> summarize_episode(const TrajectoryRecord& trajectory) {
  if (trajectory.steps.empty()) return std::nullopt;
  RunStatistics s;
  const auto n = static_cast<double>(trajectory.steps.size());
  double sum = 0.0;
  s.d_max = s.d_min = trajectory.steps.front().distance;
  for (const auto& step : trajectory.steps) {
    const double d = step.distance;
    sum += d;
    s.d_max = std::max(s.d_max, d);
    s.d_min = std::min(s.d_min, d);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& step : trajectory.steps) ss += (step.distance - mean) * (step.distance - mean);
  s.sigma_sq = ss / n;
  s.rho = std::sqrt(s.sigma_sq);
  s.d_t = trajectory.steps.back().distance;
  const auto counters = fine_coarse_counters(trajectory);
  s.f_semantic = counters.f_semantic;
  s.c_semantic = counters.c_semantic;
  return s;
}

int convergence_flag(const QTable& q, Environment& env, std::uint64_t agent_seed) {
  const EncodedState start = env.reset(kProbeEpisodeSeed);
  const auto& terminal = env.config().terminal_state;
  const int shortest = shortest_path_length(start, terminal, env.grammar());
  if (shortest < 0) return 0;
  Rng rng(mix_seed(agent_seed, kProbeEpisodeSeed));
  return greedy_rollout_length(q, env.grammar(), start, terminal, 2 * shortest, rng) >= 0 ? 1 : 0;
}

TrainResult train(const RunConfiguration& config) {
  config.validate();
  auto backend = make_oracle(config.grammar, config.oracle);
  return train(config, *backend);
}

TrainResult train(const RunConfiguration& config, FeedbackOracle& backend) {
  config.validate();
  const Grammar& grammar = *config.grammar;
  const AgentConfig& agent = config.agent;

  Run run(config, backend);
  Environment& env = run.env();

  TrainResult result;
  result.q = QTable(grammar.state_count(), action_count(grammar), agent.q_init, agent.seed);
  QTable& q = result.q;
  Rng rng(mix_seed(agent.seed, kAgentStream));
  const double eps = agent.epsilon;

  for (int e = 0; e < agent.episodes; ++e) {
    TrajectoryRecord rec;
    rec.episode = e;
    EncodedState s = env.reset(static_cast<std::uint64_t>(e));
    rec.start = s;
    std::size_t si = grammar.index_of(s);

    if (agent.algorithm == Algorithm::sarsa) {
      std::size_t a = select_action(q, si, eps, rng);
      while (!env.done()) {
        const auto out = env.step(Action::from_index(a));
        const std::size_t ni = grammar.index_of(out.next_state);
        const std::size_t next_a = select_action(q, ni, eps, rng);
        sarsa_update(q, {si, a, out.reward, ni, out.is_terminal}, next_a, agent);
        rec.steps.push_back(run.record(s, a, out));
        s = out.next_state;
        si = ni;
        a = next_a;
      }
    } else {
      while (!env.done()) {
        const std::size_t a = agent.algorithm == Algorithm::random
                                  ? uniform_index(rng, q.action_count())
                                  : select_action(q, si, eps, rng);
        const auto out = env.step(Action::from_index(a));
        const std::size_t ni = grammar.index_of(out.next_state);
        if (agent.algorithm == Algorithm::q_learning) {
          q_learning_update(q, {si, a, out.reward, ni, out.is_terminal}, agent);
        }
        rec.steps.push_back(run.record(s, a, out));
        s = out.next_state;
        si = ni;
      }
    }
    for (const auto& step : rec.steps) {
      if (step.distance == 0) rec.reached_terminal = true;
    }
    result.episodes.push_back(std::move(rec));
  }

  result.oracle_requests = run.cache().requests();
  result.oracle_generations = run.cache().generations();
  if (!result.episodes.empty()) {
    result.statistics = summarize_episode(result.episodes.back());
    if (result.statistics) {
      result.statistics->conv = convergence_flag(q, env, agent.seed);
      result.statistics->oracle_calls = static_cast<double>(result.oracle_generations);
    }
  }
  return result;
}

NdgRun run_ndg(const RunConfiguration& config, std::optional<EncodedState> start) {
  config.validate();
  auto backend = make_oracle(config.grammar, config.oracle);
  return run_ndg(config, *backend, std::move(start));
}

NdgRun run_ndg(const RunConfiguration& config, FeedbackOracle& backend, std::optional<EncodedState> start) {
  config.validate();
  const Grammar& grammar = *config.grammar;
  Run run(config, backend);
  Environment& env = run.env();
  const auto& goal = config.environment.terminal_state;

  NdgRun out;
  if (start) {
    grammar.check(*start);
    out.start = *start;
  } else if (config.ndg_start) {
    out.start = *config.ndg_start;
  } else {
    out.start = env.reset(kProbeEpisodeSeed);
  }
  out.result = run_ndg(out.start, goal, grammar, config.ndg, run.cache(), config.reward, env.ground_truth());

  out.trajectory.episode = 0;
  out.trajectory.start = out.start;
  for (const auto& m : out.result.trajectory) {
    const auto obs = run.cache().observe(m.to);
    const Action action{m.axis, m.direction};
    out.trajectory.steps.push_back({m.from, action.index(), m.reward, digest(obs, env.ground_truth()), m.to,
                                    semantic_distance(m.to, goal)});
    if (m.to == goal) out.trajectory.reached_terminal = true;
  }
  out.oracle_generations = run.cache().generations();
  return out;
}

std::vector<SweepCell> expand_grid(const SweepGrid& grid) {
  grid.validate();
  std::vector<SweepCell> cells;
  for (auto a : grid.agents) {
    for (auto r : grid.rewards) {
      for (double e : grid.epsilons) {
        for (auto s : grid.seeds) cells.push_back({cells.size(), a, r, e, s});
      }
    }
  }
  return cells;
}

RunConfiguration cell_configuration(const RunConfiguration& base, const SweepCell& cell) {
  RunConfiguration cfg = base;
  cfg.agent.algorithm = cell.agent;
  cfg.reward.kind = cell.reward;
  cfg.agent.epsilon = cell.epsilon;
  cfg.set_seed(cell.seed);
  return cfg;
}

std::vector<CellResult> run_sweep(const RunConfiguration& base, const SweepGrid& grid,
                                  const SweepOptions& options) {
  const auto cells = expand_grid(grid);
  std::vector<CellResult> results(cells.size());
  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  int workers = options.parallel > 0 ? options.parallel : omp_get_max_threads();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));

  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& cell = cells[static_cast<std::size_t>(i)];
    std::optional<CellResult> r;
    if (options.checkpoint_dir) {
      r = load_checkpoint(*options.checkpoint_dir / (std::to_string(cell.ordinal) + ".json"), cell,
                          options.fingerprint);
    }
    if (!r) {
      r = run_cell(base, cell, options);
      if (options.checkpoint_dir && r->ok()) {
        try {
          save_checkpoint(*options.checkpoint_dir, *r, options.fingerprint);
        } catch (const std::exception& e) {
          r->error = e.what();
          r->error_code = 2;
        }
      }
    }
    results[static_cast<std::size_t>(i)] = std::move(*r);
    if (options.on_done) {
#pragma omp critical(rldf_sweep_progress)
      options.on_done(results[static_cast<std::size_t>(i)]);
    }
  }
  return results;
}

std::vector<AggregateRow> aggregate(const std::vector<CellResult>& results) {
  std::vector<AggregateRow> rows;
  for (const auto& r : results) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& row) {
      return row.agent == r.cell.agent && row.reward == r.cell.reward && row.epsilon == r.cell.epsilon;
    });
    if (it == rows.end()) {
      rows.push_back({r.cell.agent, r.cell.reward, r.cell.epsilon, 0, {}});
      it = std::prev(rows.end());
    }
    if (!r.ok() || !r.statistics) continue;
    const auto& s = *r.statistics;
    auto& m = it->mean;
    m.d_t += s.d_t;
    m.d_max += s.d_max;
    m.d_min += s.d_min;
    m.rho += s.rho;
    m.sigma_sq += s.sigma_sq;
    m.conv += s.conv;
    m.f_semantic += s.f_semantic;
    m.c_semantic += s.c_semantic;
    m.oracle_calls += s.oracle_calls;
    ++it->seeds;
  }
  for (auto& row : rows) {
    if (row.seeds == 0) continue;
    const double k = row.seeds;
    auto& m = row.mean;
    m.d_t /= k;
    m.d_max /= k;
    m.d_min /= k;
    m.rho /= k;
    m.sigma_sq /= k;
    m.conv /= k;
    m.f_semantic /= k;
    m.c_semantic /= k;
    m.oracle_calls /= k;
  }
  return rows;
}

namespace reference {

std::vector<CellResult> run_sweep_serial(const RunConfiguration& base, const SweepGrid& grid) {
  std::vector<CellResult> results;
  for (const auto& cell : expand_grid(grid)) results.push_back(run_cell(base, cell, {}));
  return results;
}

}  // namespace reference

}  // namespace rldf
