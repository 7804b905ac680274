#include "rldf/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "rldf/error.hpp"

namespace rldf {

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::multi_semantic: return "multi_semantic";
    case RewardKind::partial_semantic: return "partial_semantic";
    case RewardKind::clip: return "clip";
  }
  return "multi_semantic";
}

RewardKind reward_kind_from_string(std::string_view text) {
  if (text == "multi_semantic" || text == "1") return RewardKind::multi_semantic;
  if (text == "partial_semantic" || text == "2") return RewardKind::partial_semantic;
  if (text == "clip" || text == "3") return RewardKind::clip;
  throw ConfigError("reward.kind: unknown reward '" + std::string(text) + "'");
}

void RewardSpec::validate() const {
  if (!(object_match_constant > 0.0) || !std::isfinite(object_match_constant)) {
    throw ConfigError("reward.object_match_constant must be positive");
  }
  if (!(scene_match_constant > 0.0) || !std::isfinite(scene_match_constant)) {
    throw ConfigError("reward.scene_match_constant must be positive");
  }
}

GroundTruth make_ground_truth(const Grammar& grammar, const SemanticObservation& target,
                              const RewardSpec& spec) {
  GroundTruth gt{target.objects, {target.scene}, target.embedding};
  if (spec.scene_matching == SceneMatching::locality_group) {
    if (auto axis = grammar.scene_axis()) {
      const auto& scene = grammar.axis(*axis);
      if (auto index = scene.index_of(target.scene)) {
        if (auto group = scene.group_of(*index)) {
          for (int i = group->lo; i <= group->hi; ++i) gt.scenes.insert(scene.vocabulary[i]);
        }
      }
    }
  }
  return gt;
}

int matched_objects(const SemanticObservation& obs, const GroundTruth& gt) {
  int hits = 0;
  for (const auto& o : obs.objects) hits += static_cast<int>(gt.objects.count(o));
  return hits;
}

bool scene_matches(const SemanticObservation& obs, const GroundTruth& gt) {
  return gt.scenes.count(obs.scene) != 0;
}

double multi_semantic_reward(const SemanticObservation& obs, const GroundTruth& gt,
                             const RewardSpec& spec) {
  return spec.object_match_constant * matched_objects(obs, gt) +
         partial_semantic_reward(obs, gt, spec);
}

double partial_semantic_reward(const SemanticObservation& obs, const GroundTruth& gt,
                               const RewardSpec& spec) {
  return scene_matches(obs, gt) ? spec.scene_match_constant : -spec.scene_match_constant;
}

double cosine_similarity(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw DegenerateEmbeddingError("embedding lengths differ (" + std::to_string(x.size()) +
                                   " vs " + std::to_string(y.size()) + ")");
  }
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (!(xx > 0.0) || !(yy > 0.0)) throw DegenerateEmbeddingError("zero-norm embedding");
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

double clip_reward(const SemanticObservation& obs, const GroundTruth& gt, const RewardSpec&) {
  return cosine_similarity(gt.embedding, obs.embedding);
}

double compute_reward(const SemanticObservation& obs, const GroundTruth& gt, const RewardSpec& spec) {
  switch (spec.kind) {
    case RewardKind::multi_semantic: return multi_semantic_reward(obs, gt, spec);
    case RewardKind::partial_semantic: return partial_semantic_reward(obs, gt, spec);
    case RewardKind::clip: return clip_reward(obs, gt, spec);
  }
  throw InvariantError("unknown reward kind");
}

}  // namespace rldf
