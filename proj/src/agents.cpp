#include "rldf/agents.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "rldf/error.hpp"

namespace rldf {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::q_learning: return "q_learning";
    case Algorithm::sarsa: return "sarsa";
    case Algorithm::random: return "random";
  }
  return "q_learning";
}

Algorithm algorithm_from_string(std::string_view text) {
  if (text == "q_learning" || text == "q" || text == "Q") return Algorithm::q_learning;
  if (text == "sarsa" || text == "SARSA") return Algorithm::sarsa;
  if (text == "random" || text == "Random") return Algorithm::random;
  throw ConfigError("agent.algorithm: unknown algorithm '" + std::string(text) + "'");
}

std::string_view table_label(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::q_learning: return "Q";
    case Algorithm::sarsa: return "SARSA";
    case Algorithm::random: return "Random";
  }
  return "Q";
}

void AgentConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("agent.epsilon must be in [0, 1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("agent.discount must be in [0, 1)");
  if (learning_rate.schedule == LearningRate::Schedule::constant &&
      !(learning_rate.alpha >= 0.0 && learning_rate.alpha <= 1.0)) {
    throw ConfigError("agent.learning_rate.alpha must be in [0, 1]");
  }
  if (q_init.kind == QInit::Kind::uniform && !(q_init.lo <= q_init.hi)) {
    throw ConfigError("agent.q_init: lo must not exceed hi");
  }
  if (!std::isfinite(q_init.lo) || !std::isfinite(q_init.hi)) {
    throw ConfigError("agent.q_init bounds must be finite");
  }
  if (episodes < 0) throw ConfigError("agent.episodes must be >= 0");
}

QTable::QTable(std::size_t states, std::size_t actions, const QInit& init, std::uint64_t seed)
    : states_(states), actions_(actions), q_(states * actions, init.lo), visits_(states * actions, 0) {
  if (init.kind == QInit::Kind::uniform) {
    Rng rng(mix_seed(seed, 0x51'7A'B1'E0ULL));
    for (auto& v : q_) v = init.lo + (init.hi - init.lo) * uniform_unit(rng);
  }
}

double QTable::max_value(std::size_t s) const {
  auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

std::size_t greedy_action(const QTable& q, std::size_t state, Rng& rng) {
  auto r = q.row(state);
  const double best = *std::max_element(r.begin(), r.end());
  std::size_t ties = 0;
  for (double v : r) ties += v == best ? 1 : 0;
  std::size_t pick = ties == 1 ? 0 : uniform_index(rng, ties);
  for (std::size_t a = 0; a < r.size(); ++a) {
    if (r[a] == best && pick-- == 0) return a;
  }
  throw InvariantError("greedy_action: no maximiser found");
}

std::size_t select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng) {
  if (uniform_unit(rng) < epsilon) return uniform_index(rng, q.action_count());
  return greedy_action(q, state, rng);
}

void q_learning_update(QTable& q, const Transition& t, const AgentConfig& config) {
  const double bootstrap = t.terminal ? 0.0 : q.max_value(t.next_state);
  const double alpha = config.learning_rate.at(q.visits(t.state, t.action));
  const double old = q.value(t.state, t.action);
  q.set(t.state, t.action, old + alpha * (t.reward + config.discount * bootstrap - old));
  q.add_visit(t.state, t.action);
}

void sarsa_update(QTable& q, const Transition& t, std::size_t next_action, const AgentConfig& config) {
  const double bootstrap = t.terminal ? 0.0 : q.value(t.next_state, next_action);
  const double alpha = config.learning_rate.at(q.visits(t.state, t.action));
  const double old = q.value(t.state, t.action);
  q.set(t.state, t.action, old + alpha * (t.reward + config.discount * bootstrap - old));
  q.add_visit(t.state, t.action);
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double g = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) g = rewards[k] + gamma * g;
  return g;
}

int shortest_path_length(const EncodedState& start, const EncodedState& terminal,
                         const Grammar& grammar) {
  grammar.check(start);
  grammar.check(terminal);
  const auto n = grammar.state_count();
  const auto target = grammar.index_of(terminal);
  std::vector<int> dist(n, -1);
  std::deque<std::uint64_t> frontier;
  const auto source = grammar.index_of(start);
  dist[source] = 0;
  frontier.push_back(source);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop_front();
    if (u == target) return dist[u];
    const EncodedState s = grammar.state_at(u);
    for (const auto& a : action_set(grammar)) {
      const auto v = grammar.index_of(transition(grammar, s, a));
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return -1;
}

int greedy_rollout_length(const QTable& q, const Grammar& grammar, const EncodedState& start,
                          const EncodedState& terminal, int max_steps, Rng& rng) {
  EncodedState s = start;
  for (int step = 0; step <= max_steps; ++step) {
    if (s == terminal) return step;
    if (step == max_steps) break;
    const auto a = greedy_action(q, grammar.index_of(s), rng);
    s = transition(grammar, s, Action::from_index(a));
  }
  return -1;
}

}  // namespace rldf
