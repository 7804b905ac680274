#include "rldf/environment.hpp"

#include <algorithm>

#include "rldf/error.hpp"

namespace rldf {

std::vector<Action> action_set(const Grammar& grammar) {
  std::vector<Action> actions;
  actions.reserve(action_count(grammar));
  for (std::size_t i = 0; i < action_count(grammar); ++i) actions.push_back(Action::from_index(i));
  return actions;
}

std::string action_name(const Grammar& grammar, const Action& action) {
  return grammar.axis(action.axis).name + (action.direction > 0 ? "+1" : "-1");
}

void EnvironmentConfig::validate(const Grammar& grammar) const {
  if (!grammar.is_valid(terminal_state)) {
    throw ConfigError("environment.terminal: encoding " + format_coords(terminal_state) +
                      " is not valid under the grammar");
  }
  if (max_steps_per_episode < 1) throw ConfigError("environment.max_steps_per_episode must be >= 1");
  for (const auto& p : penalty_states) {
    if (!grammar.is_valid(p)) {
      throw ConfigError("environment.penalty_states: invalid encoding " + format_coords(p));
    }
  }
  if (!penalty_states.empty() && !(penalty_reward < 0.0)) {
    throw ConfigError("environment.penalty_reward must be negative");
  }
}

Environment::Environment(std::shared_ptr<const Grammar> grammar, EnvironmentConfig config,
                         FeedbackOracle& oracle, RewardSpec reward)
    : grammar_(std::move(grammar)), config_(std::move(config)), oracle_(oracle), reward_(reward) {
  config_.validate(*grammar_);
  reward_.validate();
  gt_ = make_ground_truth(*grammar_, oracle_.target_semantics(config_.terminal_state), reward_);
  for (const auto& p : config_.penalty_states) penalty_index_.push_back(grammar_->index_of(p));
  std::sort(penalty_index_.begin(), penalty_index_.end());
}

EncodedState Environment::reset(std::uint64_t episode_seed) {
  const std::uint64_t n = grammar_->state_count();
  if (n < 2) throw ConfigError("environment: the lattice has a single state, no valid start exists");
  Rng rng(mix_seed(config_.rng_seed, episode_seed));
  // Uniform over the n-1 non-terminal states.
  std::uint64_t k = uniform_index(rng, n - 1);
  if (k >= grammar_->index_of(config_.terminal_state)) ++k;
  state_ = grammar_->state_at(k);
  steps_ = 0;
  done_ = false;
  return state_;
}

double Environment::reward_of(const EncodedState& state, const SemanticObservation& obs) const {
  if (!penalty_index_.empty() &&
      std::binary_search(penalty_index_.begin(), penalty_index_.end(), grammar_->index_of(state))) {
    return config_.penalty_reward;
  }
  return compute_reward(obs, gt_, reward_);
}

StepOutcome Environment::step(const Action& action) {
  if (done_) throw InvariantError("environment: step() called after the episode ended");
  if (action.axis >= grammar_->axis_count() || (action.direction != 1 && action.direction != -1)) {
    throw InvariantError("environment: action outside the action set");
  }
  StepOutcome out;
  out.next_state = transition(*grammar_, state_, action);
  out.observation = oracle_.observe(out.next_state);
  out.reward = reward_of(out.next_state, out.observation);
  out.is_terminal = config_.terminal_stops_episode && is_goal(out.next_state);
  out.step_index = steps_;

  state_ = out.next_state;
  ++steps_;
  done_ = out.is_terminal || steps_ >= config_.max_steps_per_episode;
  return out;
}

}  // namespace rldf
