#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rldf/grammar.hpp"
#include "rldf/oracle.hpp"
#include "rldf/random.hpp"
#include "rldf/rewards.hpp"

namespace rldf {

/// Unit move along one axis. Indexed 2*axis for +1 and 2*axis+1 for -1.
struct Action {
  std::size_t axis = 0;
  int direction = 1;

  std::size_t index() const noexcept { return 2 * axis + (direction > 0 ? 0 : 1); }
  static Action from_index(std::size_t index) noexcept {
    return {index / 2, index % 2 == 0 ? 1 : -1};
  }
  friend bool operator==(const Action&, const Action&) = default;
};

inline std::size_t action_count(const Grammar& grammar) noexcept { return 2 * grammar.axis_count(); }
std::vector<Action> action_set(const Grammar& grammar);
std::string action_name(const Grammar& grammar, const Action& action);  // e.g. "noun+1"

struct EnvironmentConfig {
  EncodedState terminal_state;
  int max_steps_per_episode = 100;
  bool terminal_stops_episode = false;  // post-goal training by default
  std::uint64_t rng_seed = 0;
  /// Unrealistic encodings; entering one yields penalty_reward instead of the
  /// oracle reward. Empty by default.
  std::vector<EncodedState> penalty_states;
  double penalty_reward = -1.0;

  void validate(const Grammar& grammar) const;
};

struct StepOutcome {
  EncodedState next_state;
  SemanticObservation observation;
  double reward = 0.0;
  bool is_terminal = false;
  int step_index = 0;
};

/// Deterministic transition kernel: clamped slide along the action's axis.
inline EncodedState transition(const Grammar& grammar, const EncodedState& state, const Action& action) {
  return slide(state, grammar, action.axis, action.direction);
}

/// The lattice MDP. All stochasticity is in the oracle's observations; the
/// instance owns an episode cursor and is single-threaded.
class Environment {
 public:
  Environment(std::shared_ptr<const Grammar> grammar, EnvironmentConfig config,
              FeedbackOracle& oracle, RewardSpec reward);

  /// Uniform non-terminal start drawn from a stream keyed by
  /// (rng_seed, episode_seed). Throws ConfigError on a one-state lattice.
  EncodedState reset(std::uint64_t episode_seed);

  /// Applies the action to the current state. Throws InvariantError once the
  /// episode is over (terminal reached with terminal_stops_episode, or the
  /// step cap exhausted).
  StepOutcome step(const Action& action);

  /// Reward for entering `state`, without moving the cursor.
  double reward_of(const EncodedState& state, const SemanticObservation& obs) const;

  const EncodedState& state() const noexcept { return state_; }
  int steps_taken() const noexcept { return steps_; }
  bool done() const noexcept { return done_; }
  bool is_goal(const EncodedState& s) const noexcept { return s == config_.terminal_state; }

  const Grammar& grammar() const noexcept { return *grammar_; }
  const EnvironmentConfig& config() const noexcept { return config_; }
  const GroundTruth& ground_truth() const noexcept { return gt_; }
  const RewardSpec& reward_spec() const noexcept { return reward_; }
  FeedbackOracle& oracle() noexcept { return oracle_; }

 private:
  std::shared_ptr<const Grammar> grammar_;
  EnvironmentConfig config_;
  FeedbackOracle& oracle_;
  RewardSpec reward_;
  GroundTruth gt_;
  std::vector<std::uint64_t> penalty_index_;
  EncodedState state_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace rldf
