#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rldf/grammar.hpp"
#include "rldf/oracle.hpp"
#include "rldf/rewards.hpp"

namespace rldf {

struct NdgConfig {
  int max_iterations = 200;
  int probe_step = 1;
  int plateau_patience = 3;
  bool stop_at_goal = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Finite-difference probe along one axis, relative to R(state).
/// A clamped probe lands on the state itself and has zero gain.
struct AxisProbe {
  double forward_gain = 0.0;   // R(slide(+probe_step)) - R(state)
  double backward_gain = 0.0;  // R(slide(-probe_step)) - R(state)

  /// R(+) - R(-): central difference, one-sided where a probe clamps.
  double slope() const noexcept { return forward_gain - backward_gain; }
  /// Largest single-direction improvement; <= 0 at a local maximum.
  double best_gain() const noexcept { return forward_gain > backward_gain ? forward_gain : backward_gain; }
};

/// Reward-difference vector at `state`, one probe per axis. The 2*axes
/// neighbours are requested as one oracle batch.
std::vector<AxisProbe> estimate_gradient(const EncodedState& state, const Grammar& grammar,
                                         FeedbackOracle& oracle, const RewardSpec& spec,
                                         const GroundTruth& gt, int probe_step = 1);

enum class NdgStatus { reached_goal, plateau, max_iters };
std::string_view to_string(NdgStatus status);

struct NdgMove {
  EncodedState from;
  std::size_t axis = 0;
  int direction = 1;
  EncodedState to;
  double reward = 0.0;  // R(to)
};

struct NdgResult {
  EncodedState final_state;
  double final_reward = 0.0;
  std::vector<NdgMove> trajectory;  // accepted moves only
  NdgStatus status = NdgStatus::max_iters;
  int iterations = 0;
  /// Set when stop_at_goal was off and the goal was visited along the way.
  bool passed_goal = false;
};

/// Steepest-coordinate ascent on the reward over encodings. Each iteration
/// probes every axis and moves one lattice step in the direction with the
/// largest positive gain (ties: lowest axis, then +1). Stops at the goal
/// (stop_at_goal), after plateau_patience consecutive iterations without a
/// positive gain, or at max_iterations.
NdgResult run_ndg(const EncodedState& start, const EncodedState& goal, const Grammar& grammar,
                  const NdgConfig& config, FeedbackOracle& oracle, const RewardSpec& spec,
                  const GroundTruth& gt);

}  // namespace rldf
