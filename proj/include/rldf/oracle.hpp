#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rldf/grammar.hpp"

namespace rldf {

/// What the recognizers report for one generated image.
struct SemanticObservation {
  std::set<std::string> objects;
  std::string scene;
  std::vector<double> embedding;  // unit L2 norm

  friend bool operator==(const SemanticObservation&, const SemanticObservation&) = default;
};

nlohmann::json to_json(const SemanticObservation& obs);

enum class OracleKind { simulated, external };

enum class Transport { process, tcp };

struct ExternalOracleConfig {
  Transport transport = Transport::process;
  std::vector<std::string> command;  // argv for the child process
  std::string host = "127.0.0.1";
  int port = 0;
  double timeout_seconds = 120.0;
  /// Opaque strings (negative prompts, scheduler settings) forwarded verbatim.
  std::map<std::string, std::string> options;
};

struct OracleConfig {
  OracleKind kind = OracleKind::simulated;
  std::uint64_t seed = 0;
  double noise_drop_prob = 0.0;
  double noise_swap_prob = 0.0;
  int embedding_dim = 64;
  double locality_bandwidth = 1.0;
  ExternalOracleConfig external;

  void validate() const;
};

/// Source of diffusion feedback for encoded states.
class FeedbackOracle {
 public:
  virtual ~FeedbackOracle() = default;

  virtual SemanticObservation observe(const EncodedState& state) = 0;

  /// Observations for several states; backends may pipeline the requests.
  virtual std::vector<SemanticObservation> observe_batch(std::span<const EncodedState> states);

  /// Ground-truth semantics of the goal encoding.
  virtual SemanticObservation target_semantics(const EncodedState& terminal) = 0;
};

/// Noiseless objects and scene of a state, read straight off its terms.
SemanticObservation noiseless_semantics(const Grammar& grammar, const EncodedState& state);

/// Embedding dimension the simulated oracle needs for this grammar and bandwidth.
int required_embedding_dim(const Grammar& grammar, double locality_bandwidth);

/// Deterministic stand-in for the diffusion model plus recognizers.
///
/// Observations are a pure function of (seed, state): object phrases are
/// dropped with noise_drop_prob and the scene is swapped for a vocabulary
/// neighbour with noise_swap_prob, using an RNG keyed by the state index.
/// The embedding concatenates one block per axis; each block is a triangular
/// bump of half-width locality_bandwidth centred on the term's index,
/// normalised, so the cosine between two states falls off with per-axis
/// lattice distance.
class SimulatedOracle final : public FeedbackOracle {
 public:
  SimulatedOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config);

  SemanticObservation observe(const EncodedState& state) override { return compute(state); }
  SemanticObservation target_semantics(const EncodedState& terminal) override;

  /// Thread-safe; observe() forwards here.
  SemanticObservation compute(const EncodedState& state) const;
  SemanticObservation compute_target(const EncodedState& terminal) const;

  const OracleConfig& config() const noexcept { return config_; }
  const Grammar& grammar() const noexcept { return *grammar_; }

 private:
  std::vector<double> embed(const EncodedState& coords, const std::vector<bool>& present) const;

  std::shared_ptr<const Grammar> grammar_;
  OracleConfig config_;
  int pad_ = 0;
};

/// Memoises one observation per state and counts backend generations.
class CachedOracle final : public FeedbackOracle {
 public:
  CachedOracle(const Grammar& grammar, FeedbackOracle& inner) : grammar_(grammar), inner_(inner) {}

  SemanticObservation observe(const EncodedState& state) override;
  std::vector<SemanticObservation> observe_batch(std::span<const EncodedState> states) override;
  SemanticObservation target_semantics(const EncodedState& terminal) override {
    return inner_.target_semantics(terminal);
  }

  std::uint64_t requests() const noexcept { return requests_; }
  /// Distinct states sent to the backend.
  std::uint64_t generations() const noexcept { return cache_.size(); }

 private:
  const Grammar& grammar_;
  FeedbackOracle& inner_;
  std::unordered_map<std::uint64_t, SemanticObservation> cache_;
  std::uint64_t requests_ = 0;
};

/// Simulated or external oracle, as configured.
std::unique_ptr<FeedbackOracle> make_oracle(std::shared_ptr<const Grammar> grammar,
                                            const OracleConfig& config);

}  // namespace rldf
