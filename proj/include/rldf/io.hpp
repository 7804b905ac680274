#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rldf/agents.hpp"
#include "rldf/grammar.hpp"
#include "rldf/harness.hpp"
#include "rldf/ndg.hpp"

namespace rldf {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

// Statistics table ----------------------------------------------------------

struct StatisticsRow {
  std::string agent;  // table label: Q, SARSA, Random
  RewardKind reward = RewardKind::multi_semantic;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  RunStatistics statistics;
};

/// Agent,Reward,ε,D_T,D_max,D_min,ρ,σ²,Conv.,F Semantic,C Semantic,seed,oracle_calls
const std::vector<std::string>& statistics_columns();

void write_statistics_csv(std::ostream& out, const std::vector<StatisticsRow>& rows);
/// Seed-averaged table; the seed column is replaced by the number of seeds.
void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
/// ordinal,Agent,Reward,ε,seed,error
void write_failures_csv(std::ostream& out, const std::vector<CellResult>& results);

nlohmann::json to_json(const RunStatistics& s);
RunStatistics statistics_from_json(const nlohmann::json& j);

// Trajectory log ------------------------------------------------------------
//
// Newline-delimited JSON:
//   {"type":"header","agent":..,"reward":..,"epsilon":..,"seed":..,"terminal":[..],"axes":[..]}
//   {"type":"episode","episode":e,"start":[..],"reached_terminal":b,"steps":[
//       {"state":[..],"action":a,"reward":r,"objects_mask":m,"objects_matched":k,
//        "scene_matched":b,"next_state":[..],"distance":d}, ...]}
//   {"type":"summary","conv":c,"oracle_calls":n,"episodes":E}

struct TrajectoryHeader {
  std::string agent;
  int reward = 1;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  EncodedState terminal;
  std::vector<std::string> axes;
};

struct TrajectoryLog {
  TrajectoryHeader header;
  std::vector<TrajectoryRecord> episodes;
  int conv = 0;
  std::uint64_t oracle_calls = 0;
};

void write_trajectory_log(std::ostream& out, const TrajectoryLog& log);

/// Parses a log. Distances are recomputed from next_state and the header's
/// terminal; a stored distance that disagrees is an InvariantError.
TrajectoryLog read_trajectory_log(std::istream& in);

/// Statistics of the log's final episode, with conv and oracle_calls taken
/// from the summary record.
std::optional<RunStatistics> replay_statistics(const TrajectoryLog& log);

// Q-table snapshot ----------------------------------------------------------

/// One row per (state, action): <axis columns>,action,q,visits. Axis columns
/// hold coordinates; action is e.g. "noun+1".
void write_qtable_csv(std::ostream& out, const QTable& q, const Grammar& grammar);

// NDG ------------------------------------------------------------------------

nlohmann::ordered_json to_json(const NdgRun& run, const Grammar& grammar);

}  // namespace rldf
