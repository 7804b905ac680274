#include "rldf/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rldf/error.hpp"
#include "rldf/external_oracle.hpp"
#include "rldf/random.hpp"

namespace rldf {

nlohmann::json to_json(const SemanticObservation& obs) {
  return {{"objects", obs.objects}, {"scene", obs.scene}, {"embedding", obs.embedding}};
}

void OracleConfig::validate() const {
  if (!(noise_drop_prob >= 0.0 && noise_drop_prob <= 1.0)) {
    throw ConfigError("oracle.noise_drop_prob must be in [0, 1]");
  }
  if (!(noise_swap_prob >= 0.0 && noise_swap_prob <= 1.0)) {
    throw ConfigError("oracle.noise_swap_prob must be in [0, 1]");
  }
  if (embedding_dim < 2) throw ConfigError("oracle.embedding_dim must be >= 2");
  if (!(locality_bandwidth >= 0.0) || !std::isfinite(locality_bandwidth)) {
    throw ConfigError("oracle.locality_bandwidth must be a non-negative finite number");
  }
  if (kind == OracleKind::external) {
    if (external.transport == Transport::process && external.command.empty()) {
      throw ConfigError("oracle.external.command must name the backend executable");
    }
    if (external.transport == Transport::tcp && (external.port <= 0 || external.port > 65535)) {
      throw ConfigError("oracle.external.port must be in [1, 65535]");
    }
    if (!(external.timeout_seconds > 0.0)) {
      throw ConfigError("oracle.external.timeout_seconds must be positive");
    }
  }
}

std::vector<SemanticObservation> FeedbackOracle::observe_batch(
    std::span<const EncodedState> states) {
  std::vector<SemanticObservation> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(observe(s));
  return out;
}

SemanticObservation noiseless_semantics(const Grammar& grammar, const EncodedState& state) {
  grammar.check(state);
  SemanticObservation obs;
  for (const auto& slot : grammar.object_slots()) obs.objects.insert(grammar.object_label(slot, state));
  if (auto scene = grammar.scene_axis()) {
    obs.scene = grammar.axis(*scene).vocabulary[state.coords[*scene]];
  }
  return obs;
}

int required_embedding_dim(const Grammar& grammar, double locality_bandwidth) {
  const int pad = static_cast<int>(std::ceil(locality_bandwidth));
  int dim = 0;
  for (const auto& axis : grammar.axes()) dim += axis.size() + 2 * pad;
  return dim;
}

SimulatedOracle::SimulatedOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config)
    : grammar_(std::move(grammar)), config_(std::move(config)) {
  config_.validate();
  pad_ = static_cast<int>(std::ceil(config_.locality_bandwidth));
  const int needed = required_embedding_dim(*grammar_, config_.locality_bandwidth);
  if (needed > config_.embedding_dim) {
    throw ConfigError("oracle.embedding_dim is " + std::to_string(config_.embedding_dim) +
                      " but the grammar needs " + std::to_string(needed) +
                      " dimensions at locality_bandwidth " +
                      std::to_string(config_.locality_bandwidth));
  }
}

std::vector<double> SimulatedOracle::embed(const EncodedState& coords,
                                           const std::vector<bool>& present) const {
  std::vector<double> out(static_cast<std::size_t>(config_.embedding_dim), 0.0);
  const double width = config_.locality_bandwidth + 1.0;
  int used = 0;
  for (bool p : present) used += p ? 1 : 0;
  const bool all = used == 0;
  if (all) used = static_cast<int>(present.size());

  std::size_t offset = 0;
  for (std::size_t i = 0; i < grammar_->axis_count(); ++i) {
    const int block = grammar_->axis(i).size() + 2 * pad_;
    if (all || present[i]) {
      const int centre = coords.coords[i] + pad_;
      double norm_sq = 0.0;
      for (int m = -pad_; m <= pad_; ++m) {
        const double w = std::max(0.0, 1.0 - std::abs(m) / width);
        norm_sq += w * w;
      }
      const double scale = 1.0 / std::sqrt(norm_sq * used);
      for (int m = -pad_; m <= pad_; ++m) {
        const double w = std::max(0.0, 1.0 - std::abs(m) / width);
        out[offset + static_cast<std::size_t>(centre + m)] = w * scale;
      }
    }
    offset += static_cast<std::size_t>(block);
  }
  return out;
}

SemanticObservation SimulatedOracle::compute(const EncodedState& state) const {
  const Grammar& g = *grammar_;
  g.check(state);
  Rng rng(mix_seed(config_.seed, g.index_of(state)));

  SemanticObservation obs;
  std::vector<bool> present(g.axis_count(), true);
  for (const auto& slot : g.object_slots()) {
    if (uniform_unit(rng) < config_.noise_drop_prob) {
      for (auto axis : slot.axes) present[axis] = false;
    } else {
      obs.objects.insert(g.object_label(slot, state));
    }
  }

  EncodedState seen = state;
  if (auto scene = g.scene_axis()) {
    const int n = g.axis(*scene).size();
    if (uniform_unit(rng) < config_.noise_swap_prob && n > 1) {
      int& c = seen.coords[*scene];
      const int step = uniform_index(rng, 2) == 0 ? -1 : 1;
      c = (c + step < 0 || c + step >= n) ? c - step : c + step;
    }
    obs.scene = g.axis(*scene).vocabulary[seen.coords[*scene]];
  }
  obs.embedding = embed(seen, present);
  return obs;
}

SemanticObservation SimulatedOracle::compute_target(const EncodedState& terminal) const {
  SemanticObservation obs = noiseless_semantics(*grammar_, terminal);
  obs.embedding = embed(terminal, std::vector<bool>(grammar_->axis_count(), true));
  return obs;
}

SemanticObservation SimulatedOracle::target_semantics(const EncodedState& terminal) {
  return compute_target(terminal);
}

SemanticObservation CachedOracle::observe(const EncodedState& state) {
  ++requests_;
  const auto key = grammar_.index_of(state);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  return cache_.emplace(key, inner_.observe(state)).first->second;
}

std::vector<SemanticObservation> CachedOracle::observe_batch(std::span<const EncodedState> states) {
  requests_ += states.size();
  std::vector<EncodedState> missing;
  for (const auto& s : states) {
    const auto key = grammar_.index_of(s);
    if (cache_.count(key) != 0) continue;
    if (std::find(missing.begin(), missing.end(), s) == missing.end()) missing.push_back(s);
  }
  if (!missing.empty()) {
    auto fresh = inner_.observe_batch(missing);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.emplace(grammar_.index_of(missing[i]), std::move(fresh[i]));
    }
  }
  std::vector<SemanticObservation> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(cache_.at(grammar_.index_of(s)));
  return out;
}

std::unique_ptr<FeedbackOracle> make_oracle(std::shared_ptr<const Grammar> grammar,
                                            const OracleConfig& config) {
  if (config.kind == OracleKind::simulated) {
    return std::make_unique<SimulatedOracle>(std::move(grammar), config);
  }
  return std::make_unique<ExternalOracle>(std::move(grammar), config);
}

}  // namespace rldf
