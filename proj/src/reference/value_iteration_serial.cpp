#include <algorithm>
#include <cmath>

#include "rldf/error.hpp"
#include "rldf/value_iteration.hpp"

namespace rldf::reference {

MdpModel build_model_serial(const Environment& env, const SimulatedOracle& oracle) {
  const Grammar& g = env.grammar();
  MdpModel m;
  m.states = g.state_count();
  m.actions = action_count(g);
  m.absorbing.assign(m.states, 0);
  for (std::uint64_t s = 0; s < m.states; ++s) {
    const EncodedState state = g.state_at(s);
    for (const auto& action : action_set(g)) {
      const EncodedState next = transition(g, state, action);
      m.next.push_back(g.index_of(next));
      m.reward.push_back(env.reward_of(next, oracle.compute(next)));
    }
  }
  if (env.config().terminal_stops_episode) {
    m.absorbing[g.index_of(env.config().terminal_state)] = 1;
  }
  return m;
}

ValueEstimate value_iteration_serial(const MdpModel& model, double gamma, double tolerance,
                                     int max_iterations) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("value_iteration: discount must be in [0, 1)");
  const std::size_t A = model.actions;
  std::vector<double> v(model.states, 0.0);
  ValueEstimate est;
  for (int it = 1; it <= max_iterations; ++it) {
    std::vector<double> updated(model.states, 0.0);
    double delta = 0.0;
    for (std::size_t s = 0; s < model.states; ++s) {
      if (!model.absorbing[s]) {
        double best = model.reward[s * A] + gamma * v[model.next[s * A]];
        for (std::size_t a = 1; a < A; ++a) {
          best = std::max(best, model.reward[s * A + a] + gamma * v[model.next[s * A + a]]);
        }
        updated[s] = best;
      }
      delta = std::max(delta, std::abs(updated[s] - v[s]));
    }
    v = std::move(updated);
    est.iterations = it;
    est.residual = delta;
    if (delta < tolerance) break;
  }
  est.q_star.assign(model.states * A, 0.0);
  for (std::size_t s = 0; s < model.states; ++s) {
    if (model.absorbing[s]) continue;
    for (std::size_t a = 0; a < A; ++a) {
      est.q_star[s * A + a] = model.reward[s * A + a] + gamma * v[model.next[s * A + a]];
    }
  }
  est.v_star = std::move(v);
  return est;
}

}  // namespace rldf::reference
