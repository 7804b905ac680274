#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rldf/agents.hpp"
#include "rldf/environment.hpp"
#include "rldf/grammar.hpp"
#include "rldf/ndg.hpp"
#include "rldf/oracle.hpp"
#include "rldf/rewards.hpp"

namespace rldf {

struct SweepGrid {
  std::vector<Algorithm> agents;
  std::vector<RewardKind> rewards;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;

  bool empty() const noexcept {
    return agents.empty() || rewards.empty() || epsilons.empty() || seeds.empty();
  }
  void validate() const;  // throws ConfigError naming the empty axis

  /// Agents {Q, Random, SARSA} x rewards {1, 2, 3} x epsilon {0.01, 0.10}.
  static SweepGrid standard(std::vector<std::uint64_t> seeds = {0});
};

/// Everything a run needs, parsed from one JSON document:
///   grammar      inline vocabulary document, or a path relative to the file
///   environment  terminal, max_steps_per_episode, terminal_stops_episode,
///                seed, penalty_states, penalty_reward
///   oracle       kind, seed, noise_drop_prob, noise_swap_prob,
///                embedding_dim, locality_bandwidth, external{...}
///   reward       kind, object_match_constant, scene_match_constant,
///                scene_matching
///   agent        algorithm, epsilon, learning_rate{schedule, alpha},
///                discount, q_init{kind, lo, hi | value}, seed, episodes
///   ndg          max_iterations, probe_step, plateau_patience,
///                stop_at_goal, seed, start
///   sweep        agents, rewards, epsilons, seeds
///   output_dir, verbosity
struct RunConfiguration {
  std::shared_ptr<const Grammar> grammar;
  EnvironmentConfig environment;
  OracleConfig oracle;
  RewardSpec reward;
  AgentConfig agent;
  NdgConfig ndg;
  std::optional<EncodedState> ndg_start;
  SweepGrid sweep;
  std::string output_dir = "out";
  int verbosity = 0;

  /// `base_dir` resolves a grammar given as a relative path.
  static RunConfiguration from_json(const nlohmann::json& doc,
                                    const std::filesystem::path& base_dir = {});
  /// Fully expanded document: defaults filled in, grammar inlined.
  nlohmann::json to_json() const;

  /// Cross-section checks: terminal and start validity, embedding size for
  /// the simulated oracle, value ranges.
  void validate() const;

  /// Sets every section seed to `seed`.
  void set_seed(std::uint64_t seed);
};

/// Applies "a.b.c=value". The value is parsed as JSON when possible and
/// kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Sets environment.seed, oracle.seed, agent.seed and ndg.seed.
void apply_seed(nlohmann::json& doc, std::uint64_t seed);

/// Reads the file, then applies --seed, then each --set in order.
/// Throws ConfigError("config not found: ...") for a missing file.
RunConfiguration load_run_configuration(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides = {},
                                        std::optional<std::uint64_t> seed = std::nullopt);

/// Terminal / start given as coordinates or an axis -> term map.
EncodedState parse_state(const nlohmann::json& value, const Grammar& grammar,
                         std::string_view field);

}  // namespace rldf
