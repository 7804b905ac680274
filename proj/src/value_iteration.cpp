#include "rldf/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rldf/error.hpp"

namespace rldf {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ConfigError("value_iteration: discount must be in [0, 1), got " + std::to_string(gamma));
  }
}

}  // namespace

MdpModel build_model(const Environment& env, const SimulatedOracle& oracle) {
  const Grammar& g = env.grammar();
  MdpModel m;
  m.states = g.state_count();
  m.actions = action_count(g);
  m.next.resize(m.states * m.actions);
  m.reward.resize(m.states * m.actions);
  m.absorbing.assign(m.states, 0);

  const auto n = static_cast<std::int64_t>(m.states);
  std::vector<double> entering(m.states);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    const EncodedState state = g.state_at(static_cast<std::uint64_t>(s));
    entering[s] = env.reward_of(state, oracle.compute(state));
  }

#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    const EncodedState state = g.state_at(static_cast<std::uint64_t>(s));
    for (std::size_t a = 0; a < m.actions; ++a) {
      const auto next = g.index_of(transition(g, state, Action::from_index(a)));
      m.next[s * m.actions + a] = next;
      m.reward[s * m.actions + a] = entering[next];
    }
  }
  if (env.config().terminal_stops_episode) {
    m.absorbing[g.index_of(env.config().terminal_state)] = 1;
  }
  return m;
}

ValueEstimate value_iteration(const MdpModel& model, double gamma, double tolerance,
                              int max_iterations) {
  check_gamma(gamma);
  const auto n = static_cast<std::int64_t>(model.states);
  const std::size_t A = model.actions;
  std::vector<double> v(model.states, 0.0), next_v(model.states, 0.0);

  ValueEstimate est;
  for (est.iterations = 1; est.iterations <= max_iterations; ++est.iterations) {
    double delta = 0.0;
#pragma omp parallel for schedule(static) reduction(max : delta)
    for (std::int64_t s = 0; s < n; ++s) {
      double best = 0.0;
      if (!model.absorbing[s]) {
        best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) {
          const std::size_t k = static_cast<std::size_t>(s) * A + a;
          best = std::max(best, model.reward[k] + gamma * v[model.next[k]]);
        }
      }
      next_v[s] = best;
      delta = std::max(delta, std::abs(best - v[s]));
    }
    v.swap(next_v);
    est.residual = delta;
    if (delta < tolerance) break;
  }
  est.iterations = std::min(est.iterations, max_iterations);

  est.q_star.assign(model.states * A, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    if (model.absorbing[s]) continue;
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t k = static_cast<std::size_t>(s) * A + a;
      est.q_star[k] = model.reward[k] + gamma * v[model.next[k]];
    }
  }
  est.v_star = std::move(v);
  return est;
}

}  // namespace rldf
