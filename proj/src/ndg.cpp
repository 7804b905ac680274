#include "rldf/ndg.hpp"

#include "rldf/error.hpp"

namespace rldf {

void NdgConfig::validate() const {
  if (max_iterations < 0) throw ConfigError("ndg.max_iterations must be >= 0");
  if (probe_step < 1) throw ConfigError("ndg.probe_step must be >= 1");
  if (plateau_patience < 1) throw ConfigError("ndg.plateau_patience must be >= 1");
}

std::string_view to_string(NdgStatus status) {
  switch (status) {
    case NdgStatus::reached_goal: return "reached_goal";
    case NdgStatus::plateau: return "plateau";
    case NdgStatus::max_iters: return "max_iters";
  }
  return "max_iters";
}

std::vector<AxisProbe> estimate_gradient(const EncodedState& state, const Grammar& grammar,
                                         FeedbackOracle& oracle, const RewardSpec& spec,
                                         const GroundTruth& gt, int probe_step) {
  grammar.check(state);
  std::vector<EncodedState> probes{state};
  for (std::size_t i = 0; i < grammar.axis_count(); ++i) {
    probes.push_back(slide(state, grammar, i, +probe_step));
    probes.push_back(slide(state, grammar, i, -probe_step));
  }
  const auto obs = oracle.observe_batch(probes);
  const double here = compute_reward(obs[0], gt, spec);

  std::vector<AxisProbe> out(grammar.axis_count());
  for (std::size_t i = 0; i < grammar.axis_count(); ++i) {
    // A clamped probe is the state itself: zero gain by construction.
    out[i].forward_gain = probes[1 + 2 * i] == state ? 0.0 : compute_reward(obs[1 + 2 * i], gt, spec) - here;
    out[i].backward_gain = probes[2 + 2 * i] == state ? 0.0 : compute_reward(obs[2 + 2 * i], gt, spec) - here;
  }
  return out;
}

NdgResult run_ndg(const EncodedState& start, const EncodedState& goal, const Grammar& grammar,
                  const NdgConfig& config, FeedbackOracle& oracle, const RewardSpec& spec,
                  const GroundTruth& gt) {
  config.validate();
  grammar.check(start);
  grammar.check(goal);

  NdgResult result;
  EncodedState state = start;
  int stalled = 0;
  result.status = NdgStatus::max_iters;

  while (true) {
    if (state == goal) {
      if (config.stop_at_goal) {
        result.status = NdgStatus::reached_goal;
        break;
      }
      result.passed_goal = true;
    }
    if (result.iterations >= config.max_iterations) break;
    ++result.iterations;

    const auto probes = estimate_gradient(state, grammar, oracle, spec, gt, config.probe_step);
    std::size_t best_axis = 0;
    int best_dir = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (probes[i].forward_gain > best) {
        best = probes[i].forward_gain;
        best_axis = i;
        best_dir = +1;
      }
      if (probes[i].backward_gain > best) {
        best = probes[i].backward_gain;
        best_axis = i;
        best_dir = -1;
      }
    }

    if (best_dir == 0) {
      if (++stalled >= config.plateau_patience) {
        result.status = NdgStatus::plateau;
        break;
      }
      continue;
    }
    stalled = 0;
    NdgMove move{state, best_axis, best_dir, slide(state, grammar, best_axis, best_dir), 0.0};
    move.reward = compute_reward(oracle.observe(move.to), gt, spec);
    state = move.to;
    result.trajectory.push_back(std::move(move));
  }

  result.final_state = state;
  result.final_reward = compute_reward(oracle.observe(state), gt, spec);
  return result;
}

}  // namespace rldf
