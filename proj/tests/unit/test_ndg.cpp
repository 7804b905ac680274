#include <gtest/gtest.h>

#include "rldf/error.hpp"
#include "rldf/harness.hpp"
#include "rldf/ndg.hpp"
#include "rldf/random.hpp"
#include "test_support.hpp"

namespace rldf {
namespace {

using nlohmann::json;

EncodedState S(std::vector<int> c) { return EncodedState{std::move(c)}; }

struct Landscape {
  std::shared_ptr<const Grammar> grammar;
  SimulatedOracle oracle;
  RewardSpec spec;
  EncodedState goal;
  GroundTruth gt;

  Landscape(std::shared_ptr<const Grammar> g, OracleConfig oc, RewardKind kind, EncodedState goal_state)
      : grammar(std::move(g)), oracle(grammar, oc), spec{kind}, goal(std::move(goal_state)),
        gt(make_ground_truth(*grammar, oracle.compute_target(goal), spec)) {}

  NdgResult run(const EncodedState& start, const NdgConfig& cfg = {}) {
    return run_ndg(start, goal, *grammar, cfg, oracle, spec, gt);
  }
};

OracleConfig smooth() {
  OracleConfig oc;
  oc.locality_bandwidth = 4.0;
  return oc;
}

TEST(Gradient, PointsTowardTheGoalOnASmoothLandscape) {
  Landscape l(testing::shared_default_grammar(), smooth(), RewardKind::clip, S({1, 3, 2, 2}));
  const auto probes = estimate_gradient(S({0, 7, 2, 4}), *l.grammar, l.oracle, l.spec, l.gt);
  ASSERT_EQ(probes.size(), 4u);
  EXPECT_GT(probes[0].slope(), 0.0);
  EXPECT_LT(probes[1].slope(), 0.0);
  EXPECT_LT(probes[2].best_gain(), 0.0);  // already on target
  EXPECT_EQ(probes[3].forward_gain, 0.0);  // clamped at the last scene
  EXPECT_GT(probes[3].backward_gain, 0.0);
}

TEST(Ndg, SmoothClipReachesGoalAlongShortestPaths) {
  Landscape l(testing::shared_default_grammar(), smooth(), RewardKind::clip, S({1, 3, 2, 2}));
  for (std::uint64_t i = 0; i < l.grammar->state_count(); ++i) {
    const auto start = l.grammar->state_at(i);
    const auto r = l.run(start);
    EXPECT_EQ(r.status, NdgStatus::reached_goal) << format_coords(start);
    EXPECT_EQ(r.final_state, l.goal);
    EXPECT_EQ(static_cast<int>(r.trajectory.size()), semantic_distance(start, l.goal));
    for (const auto& m : r.trajectory) EXPECT_GT(m.reward, 0.0);
  }
}

TEST(Ndg, MovesAreStrictImprovements) {
  Landscape l(testing::shared_default_grammar(), smooth(), RewardKind::clip, S({2, 0, 3, 0}));
  const auto r = l.run(S({0, 7, 0, 4}));
  double previous = compute_reward(l.oracle.compute(S({0, 7, 0, 4})), l.gt, l.spec);
  for (const auto& m : r.trajectory) {
    EXPECT_EQ(semantic_distance(m.from, m.to), 1);
    EXPECT_GT(m.reward, previous);
    previous = m.reward;
  }
}

TEST(Ndg, FlatObjectAxesPlateauOnTheRightScene) {
  const auto g = testing::make_grammar(json{{"axes",
                                             {{{"name", "frequency"}, {"vocabulary", {"one", "two", "many"}}},
                                              {{"name", "noun"}, {"vocabulary", {"banana", "dog", "cat", "cow"}}},
                                              {{"name", "scene"}, {"vocabulary", {"farm", "park", "playground"}}}}}});
  Landscape l(g, {}, RewardKind::partial_semantic, S({1, 2, 1}));
  for (int f : {0, 2}) {
    for (int n : {0, 1, 3}) {
      for (int sc : {0, 1, 2}) {
        const auto r = l.run(S({f, n, sc}));
        EXPECT_EQ(r.status, NdgStatus::plateau);
        EXPECT_EQ(r.final_state, S({f, n, 1}));
      }
    }
  }
}

TEST(Ndg, TiesPreferLowestAxisThenForward) {
  const auto g = testing::make_grammar(json{{"axes",
                                             {{{"name", "colour"}, {"vocabulary", {"red", "blue", "green"}}},
                                              {{"name", "noun"}, {"vocabulary", {"car", "bus", "van"}}}}},
                                            {"production", {"colour", "noun"}}});
  Landscape l(g, {}, RewardKind::multi_semantic, S({1, 1}));
  const auto r = l.run(S({0, 2}));
  ASSERT_FALSE(r.trajectory.empty());
  EXPECT_EQ(r.trajectory[0].axis, 0u);
  EXPECT_EQ(r.trajectory[0].direction, 1);
  const auto r2 = l.run(S({2, 2}));
  ASSERT_FALSE(r2.trajectory.empty());
  EXPECT_EQ(r2.trajectory[0].axis, 0u);
  EXPECT_EQ(r2.trajectory[0].direction, -1);
}

TEST(Ndg, IterationCapAndPatience) {
  Landscape l(testing::shared_default_grammar(), smooth(), RewardKind::clip, S({1, 3, 2, 2}));
  NdgConfig cfg;
  cfg.max_iterations = 2;
  const auto capped = l.run(S({0, 7, 0, 4}), cfg);
  EXPECT_EQ(capped.status, NdgStatus::max_iters);
  EXPECT_EQ(capped.iterations, 2);
  EXPECT_EQ(capped.trajectory.size(), 2u);

  cfg = {};
  cfg.stop_at_goal = false;
  cfg.plateau_patience = 4;
  const auto past = l.run(S({1, 3, 2, 3}), cfg);
  EXPECT_TRUE(past.passed_goal);
  EXPECT_EQ(past.status, NdgStatus::plateau);
  EXPECT_EQ(past.final_state, l.goal);
  EXPECT_EQ(past.iterations, 1 + 4);

  const auto at_goal = l.run(l.goal);
  EXPECT_EQ(at_goal.status, NdgStatus::reached_goal);
  EXPECT_EQ(at_goal.iterations, 0);
  EXPECT_NEAR(at_goal.final_reward, 1.0, 1e-12);
}

TEST(Ndg, ConfigValidation) {
  NdgConfig cfg;
  cfg.probe_step = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.plateau_patience = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(to_string(NdgStatus::plateau), "plateau");
}

TEST(Ndg, HarnessRunRecordsTrajectoryAndOracleCalls) {
  auto doc = testing::default_run_doc();
  doc["reward"] = {{"kind", "clip"}};
  doc["oracle"] = {{"locality_bandwidth", 4.0}};
  const auto cfg = RunConfiguration::from_json(doc);
  const auto run = run_ndg(cfg, S({0, 0, 0, 0}));
  EXPECT_EQ(run.result.status, NdgStatus::reached_goal);
  EXPECT_EQ(run.start, S({0, 0, 0, 0}));
  EXPECT_TRUE(run.trajectory.reached_terminal);
  ASSERT_EQ(run.trajectory.steps.size(), run.result.trajectory.size());
  EXPECT_EQ(run.trajectory.steps.back().distance, 0);
  EXPECT_GT(run.oracle_generations, run.trajectory.steps.size());
  // Without an explicit start the probe episode start is used.
  const auto probe = run_ndg(cfg);
  auto backend = make_oracle(cfg.grammar, cfg.oracle);
  CachedOracle cache(*cfg.grammar, *backend);
  Environment env(cfg.grammar, cfg.environment, cache, cfg.reward);
  EXPECT_EQ(probe.start, env.reset(kProbeEpisodeSeed));
}

}  // namespace
}  // namespace rldf
