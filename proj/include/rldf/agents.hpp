#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rldf/environment.hpp"
#include "rldf/grammar.hpp"
#include "rldf/random.hpp"

namespace rldf {

enum class Algorithm { q_learning, sarsa, random };

std::string_view to_string(Algorithm algorithm);
/// Accepts "q_learning"/"q"/"Q", "sarsa"/"SARSA", "random"/"Random".
Algorithm algorithm_from_string(std::string_view text);
/// Table-column label: Q, SARSA, Random.
std::string_view table_label(Algorithm algorithm);

/// Step size alpha_t(s, a). The visit-count schedule 1/(1 + n(s, a)) has
/// divergent sum and convergent sum of squares per pair.
struct LearningRate {
  enum class Schedule { constant, visit_count };
  Schedule schedule = Schedule::visit_count;
  double alpha = 0.1;  // constant schedule only

  double at(std::uint32_t visits) const noexcept {
    return schedule == Schedule::constant ? alpha : 1.0 / (1.0 + visits);
  }
};

struct QInit {
  enum class Kind { constant, uniform };
  Kind kind = Kind::uniform;
  double lo = 0.0;
  double hi = 0.01;  // unused for constant
};

struct AgentConfig {
  Algorithm algorithm = Algorithm::q_learning;
  double epsilon = 0.1;
  LearningRate learning_rate;
  double discount = 0.9;
  QInit q_init;
  std::uint64_t seed = 0;
  int episodes = 500;

  void validate() const;
};

/// Dense action-value table indexed by (state index, action index).
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions, const QInit& init, std::uint64_t seed);

  std::size_t state_count() const noexcept { return states_; }
  std::size_t action_count() const noexcept { return actions_; }

  double value(std::size_t s, std::size_t a) const { return q_[s * actions_ + a]; }
  void set(std::size_t s, std::size_t a, double v) { q_[s * actions_ + a] = v; }
  std::uint32_t visits(std::size_t s, std::size_t a) const { return visits_[s * actions_ + a]; }
  void add_visit(std::size_t s, std::size_t a) { ++visits_[s * actions_ + a]; }

  std::span<const double> row(std::size_t s) const {
    return {q_.data() + s * actions_, actions_};
  }
  double max_value(std::size_t s) const;

  const std::vector<double>& values() const noexcept { return q_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> q_;
  std::vector<std::uint32_t> visits_;
};

/// Epsilon-greedy: with probability epsilon a uniform action, otherwise an
/// argmax of Q(state, .) with ties broken uniformly.
std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng);

/// Greedy action with uniform tie-breaking.
std::size_t greedy_action(const QTable& q, std::size_t state, Rng& rng);

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;  // bootstrap term is zero when set
};

/// Q(s,a) += alpha [r + gamma max_b Q(s',b) - Q(s,a)]; visit count incremented.
void q_learning_update(QTable& q, const Transition& t, const AgentConfig& config);

/// Q(s,a) += alpha [r + gamma Q(s',a') - Q(s,a)]; visit count incremented.
void sarsa_update(QTable& q, const Transition& t, std::size_t next_action, const AgentConfig& config);

/// Discounted return sum_k gamma^k r_k.
double discounted_return(std::span<const double> rewards, double gamma);

/// Breadth-first search over the clamped lattice.
int shortest_path_length(const EncodedState& start, const EncodedState& terminal,
                         const Grammar& grammar);

/// Follows argmax Q from `start` for at most `max_steps` moves. Returns the
/// number of moves taken to reach `terminal`, or -1.
int greedy_rollout_length(const QTable& q, const Grammar& grammar, const EncodedState& start,
                          const EncodedState& terminal, int max_steps, Rng& rng);

}  // namespace rldf
