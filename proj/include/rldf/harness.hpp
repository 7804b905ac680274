#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rldf/agents.hpp"
#include "rldf/config.hpp"
#include "rldf/environment.hpp"
#include "rldf/ndg.hpp"
#include "rldf/oracle.hpp"
#include "rldf/rewards.hpp"

namespace rldf {

/// Compact record of what an observation matched.
struct ObservationDigest {
  /// Bit i set when the i-th target object (in sorted order) was observed.
  std::uint64_t objects_mask = 0;
  bool scene_matched = false;

  int objects_matched() const noexcept;
  friend bool operator==(const ObservationDigest&, const ObservationDigest&) = default;
};

ObservationDigest digest(const SemanticObservation& obs, const GroundTruth& gt);

struct TrajectoryStep {
  EncodedState state;
  std::size_t action = 0;
  double reward = 0.0;
  ObservationDigest observation;
  EncodedState next_state;
  int distance = 0;  // from next_state to the terminal

  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct TrajectoryRecord {
  int episode = 0;
  EncodedState start;
  std::vector<TrajectoryStep> steps;
  bool reached_terminal = false;  // the terminal was entered at least once

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

struct RunStatistics {
  double d_t = 0.0;
  double d_max = 0.0;
  double d_min = 0.0;
  double rho = 0.0;       // population standard deviation of the distances
  double sigma_sq = 0.0;  // rho^2
  double conv = 0.0;  // 0 or 1 per run; a fraction once averaged
  double f_semantic = 0.0;
  double c_semantic = 0.0;
  double oracle_calls = 0.0;

  friend bool operator==(const RunStatistics&, const RunStatistics&) = default;
};

struct SemanticCounters {
  int f_semantic = 0;  // steps matching at least one target object
  int c_semantic = 0;  // steps matching the target scene
};

SemanticCounters fine_coarse_counters(const TrajectoryRecord& trajectory);

/// Distance columns and semantic counters over one episode's steps. The
/// caller fills conv and oracle_calls. Empty episodes give nullopt.
std::optional<RunStatistics> summarize_episode(const TrajectoryRecord& trajectory);

/// Episode seed of the fixed start used by the convergence probe.
inline constexpr std::uint64_t kProbeEpisodeSeed = 0xC04EE6ULL;

/// 1 when the greedy policy reaches the terminal from the probe start
/// within twice the shortest-path length.
int convergence_flag(const QTable& q, Environment& env, std::uint64_t agent_seed);

struct TrainResult {
  QTable q;
  std::vector<TrajectoryRecord> episodes;
  std::optional<RunStatistics> statistics;  // absent for zero episodes
  std::uint64_t oracle_requests = 0;
  std::uint64_t oracle_generations = 0;
};

/// Runs the configured agent for agent.episodes episodes. Episode e starts
/// from env.reset(e). Observations go through a per-run cache.
TrainResult train(const RunConfiguration& config);
/// Same, with a caller-supplied backend in place of the configured one.
TrainResult train(const RunConfiguration& config, FeedbackOracle& backend);

/// NDG from `start` (or the probe start when unset) toward the configured
/// terminal.
struct NdgRun {
  NdgResult result;
  EncodedState start;
  TrajectoryRecord trajectory;
  std::uint64_t oracle_generations = 0;
};
NdgRun run_ndg(const RunConfiguration& config, std::optional<EncodedState> start = std::nullopt);
NdgRun run_ndg(const RunConfiguration& config, FeedbackOracle& backend,
               std::optional<EncodedState> start = std::nullopt);

struct SweepCell {
  std::size_t ordinal = 0;
  Algorithm agent = Algorithm::q_learning;
  RewardKind reward = RewardKind::multi_semantic;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

/// Grid order: agents, then rewards, then epsilons, then seeds (innermost).
std::vector<SweepCell> expand_grid(const SweepGrid& grid);

/// The base configuration with the cell's agent, reward, epsilon and seed.
RunConfiguration cell_configuration(const RunConfiguration& base, const SweepCell& cell);

struct CellResult {
  SweepCell cell;
  std::optional<RunStatistics> statistics;
  std::string error;   // empty on success
  int error_code = 0;  // CLI exit code class of the failure
  bool resumed = false;

  bool ok() const noexcept { return error.empty(); }
};

struct SweepOptions {
  int parallel = 0;  // <= 0: min(cells, available workers)
  /// When set, each finished cell is written to <dir>/<ordinal>.json and
  /// existing matching files are loaded instead of rerun.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Stored with each checkpoint; files with a different value are rerun.
  std::string fingerprint;
  /// Called once per finished cell, serialised.
  std::function<void(const CellResult&)> on_done;
  /// Test hook: runs instead of train() for each cell.
  std::function<std::optional<RunStatistics>(const RunConfiguration&)> runner;
};

/// One result per cell, in grid order. Cell failures are recorded, not thrown.
std::vector<CellResult> run_sweep(const RunConfiguration& base, const SweepGrid& grid,
                                  const SweepOptions& options = {});

struct AggregateRow {
  Algorithm agent = Algorithm::q_learning;
  RewardKind reward = RewardKind::multi_semantic;
  double epsilon = 0.0;
  int seeds = 0;  // successful cells averaged
  RunStatistics mean;
};

/// Seed-averaged statistics per (agent, reward, epsilon), in grid order.
std::vector<AggregateRow> aggregate(const std::vector<CellResult>& results);

namespace reference {

/// Serial sweep without checkpointing, kept as a test oracle.
std::vector<CellResult> run_sweep_serial(const RunConfiguration& base, const SweepGrid& grid);

}  // namespace reference

}  // namespace rldf
