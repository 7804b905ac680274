#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rldf/environment.hpp"
#include "rldf/oracle.hpp"

namespace rldf {

/// Tabular model of a deterministic environment: for each (state, action)
/// the successor index and the reward for entering it.
struct MdpModel {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<std::uint64_t> next;
  std::vector<double> reward;
  /// Terminal states of stopping episodes: value 0, no further reward.
  std::vector<std::uint8_t> absorbing;
};

/// Enumerates the lattice, querying `oracle` once per state. OpenMP-parallel
/// over states.
MdpModel build_model(const Environment& env, const SimulatedOracle& oracle);

struct ValueEstimate {
  std::vector<double> v_star;  // per state
  std::vector<double> q_star;  // states x actions, row-major
  int iterations = 0;
  double residual = 0.0;  // last sup-norm change

  double q(std::size_t s, std::size_t a, std::size_t actions) const { return q_star[s * actions + a]; }
};

/// Synchronous Bellman optimality backups until the sup-norm change drops
/// below `tolerance`. OpenMP-parallel over states. Throws ConfigError for
/// gamma outside [0, 1).
ValueEstimate value_iteration(const MdpModel& model, double gamma, double tolerance,
                              int max_iterations = 1'000'000);

namespace reference {

/// Serial versions of the kernels above, kept as test oracles.
MdpModel build_model_serial(const Environment& env, const SimulatedOracle& oracle);
ValueEstimate value_iteration_serial(const MdpModel& model, double gamma, double tolerance,
                                     int max_iterations = 1'000'000);

}  // namespace reference

}  // namespace rldf
