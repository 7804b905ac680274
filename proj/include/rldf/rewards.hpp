#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rldf/grammar.hpp"
#include "rldf/oracle.hpp"

namespace rldf {

/// Numbered 1, 2, 3 in statistics tables.
enum class RewardKind { multi_semantic = 1, partial_semantic = 2, clip = 3 };

std::string_view to_string(RewardKind kind);
RewardKind reward_kind_from_string(std::string_view text);  // name or "1"/"2"/"3"

enum class SceneMatching { strict, locality_group };

struct RewardSpec {
  RewardKind kind = RewardKind::multi_semantic;
  double object_match_constant = 1.0;  // C
  double scene_match_constant = 0.5;   // C_s
  SceneMatching scene_matching = SceneMatching::strict;

  void validate() const;
};

/// Target semantics the rewards compare against.
struct GroundTruth {
  std::set<std::string> objects;
  std::set<std::string> scenes;
  std::vector<double> embedding;
};

/// Singleton scene set, or the whole locality group of the target scene
/// under SceneMatching::locality_group.
GroundTruth make_ground_truth(const Grammar& grammar, const SemanticObservation& target,
                              const RewardSpec& spec);

/// C per matched object plus +C_s on a scene match, -C_s otherwise.
double multi_semantic_reward(const SemanticObservation& obs, const GroundTruth& gt,
                             const RewardSpec& spec);

/// +C_s on a scene match, -C_s otherwise. Objects are ignored.
double partial_semantic_reward(const SemanticObservation& obs, const GroundTruth& gt,
                               const RewardSpec& spec);

/// Cosine similarity of the two embeddings. Throws DegenerateEmbeddingError
/// when either has zero norm or the lengths differ.
double clip_reward(const SemanticObservation& obs, const GroundTruth& gt, const RewardSpec& spec);

double compute_reward(const SemanticObservation& obs, const GroundTruth& gt, const RewardSpec& spec);

double cosine_similarity(const std::vector<double>& x, const std::vector<double>& y);

/// Number of observed objects that are in the target set.
int matched_objects(const SemanticObservation& obs, const GroundTruth& gt);
bool scene_matches(const SemanticObservation& obs, const GroundTruth& gt);

}  // namespace rldf
