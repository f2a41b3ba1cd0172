#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tgrpo/environment.hpp"
#include "tgrpo/errors.hpp"
#include "tgrpo/random.hpp"
#include "tgrpo/reward.hpp"

namespace tgrpo {
namespace {

EnvState make_state(Vec3 effector, Vec3 object, Vec3 goal) {
  EnvState s;
  s.effector = effector;
  s.object = object;
  s.goal = goal;
  s.effector_start = effector;
  s.object_start = object;
  return s;
}

TEST(Reward, DetectStageExamples) {
  const StageSpec spec;
  EnvState far = make_state({0.3, 0.0, 0.0}, {-0.2, 0.0, 0.0}, {0.0, 0.3, 0.0});
  EXPECT_EQ(detect_stage(spec, far), Stage::kApproach);

  EnvState near = far;
  near.effector = {-0.2, 0.02, 0.0};
  EXPECT_EQ(detect_stage(spec, near), Stage::kGrasp);

  EnvState carried = near;
  carried.gripper_closed = true;
  carried.carried = true;
  carried.object = carried.effector;
  EXPECT_EQ(detect_stage(spec, carried), Stage::kMove);

  EnvState placed = far;
  placed.object = {0.0, 0.3 + 0.5 * spec.goal_radius, 0.0};
  EXPECT_EQ(detect_stage(spec, placed), Stage::kPlace);
}

TEST(Reward, NonFiniteStateIsSpecificationError) {
  const StageSpec spec;
  EnvState bad = make_state({0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}, {0.2, 0.0, 0.0});
  bad.object[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    detect_stage(spec, bad);
    FAIL() << "expected SpecificationError";
  } catch (const SpecificationError& e) {
    EXPECT_NE(std::string(e.what()).find("effector"), std::string::npos);
  }
}

TEST(Reward, GraspBoundaryIsJustBelowNextBase) {
  const StageSpec spec;
  EnvState s = make_state({0.3, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.3, 0.0});
  s.effector = {spec.grasp_radius + 1e-12, 0.0, 0.0};
  EXPECT_EQ(detect_stage(spec, s), Stage::kApproach);
  const double r = stage_reward(spec, s);
  EXPECT_NEAR(r, spec.progress_fraction, 1e-9);
  EXPECT_LT(r, spec.base_rewards[1]);
}

TEST(Reward, CompletedTaskEarnsMaximumBase) {
  const StageSpec spec;
  EnvState s = make_state({0.0, 0.3, 0.0}, {0.0, 0.3, 0.0}, {0.0, 0.3, 0.0});
  s.success = true;
  EXPECT_EQ(stage_reward(spec, s), spec.base_rewards[3]);
}

TEST(Reward, CloserWithinStageIsStrictlyBetter) {
  const StageSpec spec;
  const TaskConfig task;
  Rng rng(4);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const EnvState base = spawn(task, static_cast<std::uint64_t>(trial));
    // Approach: move the effector one step toward the object.
    EnvState a = base;
    EnvState b = base;
    const double frac = uniform(rng, 0.1, 0.9);
    for (std::size_t k = 0; k < 3; ++k) {
      b.effector[k] = a.effector[k] + frac * (a.object[k] - a.effector[k]);
    }
    if (detect_stage(spec, b) != Stage::kApproach) continue;
    EXPECT_GT(stage_reward(spec, b), stage_reward(spec, a));
    // Move: carry the object toward the goal.
    EnvState c = base;
    c.carried = c.gripper_closed = true;
    c.effector = c.object;
    EnvState d = c;
    for (std::size_t k = 0; k < 3; ++k) {
      d.effector[k] = c.effector[k] + frac * (c.goal[k] - c.effector[k]);
    }
    d.object = d.effector;
    EXPECT_GT(stage_reward(spec, d), stage_reward(spec, c));
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Reward, ShapingExamples) {
  KeyposeSet set;
  set.poses = {{0.1, 0.2, 0.3}};
  set.weight = 1.0;
  set.length_scale = 0.25;
  EnvState s;
  s.effector = {0.1, 0.2, 0.3};
  EXPECT_EQ(pose_shaping(set, s), 1.0);
  s.effector = {0.1 + 0.25, 0.2, 0.3};
  EXPECT_NEAR(pose_shaping(set, s), 0.36787944117144233, 1e-15);
}

TEST(Reward, ShapingDecreasesWithDistance) {
  KeyposeSet set;
  set.poses = {{0.0, 0.0, 0.0}, {0.4, 0.4, 0.4}};
  EnvState s;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20; ++k) {
    s.effector = {-0.01 * k, 0.0, 0.0};
    const double v = pose_shaping(set, s);
    EXPECT_LT(v, previous);
    previous = v;
  }
}

TEST(Reward, StepRewardIsAdditive) {
  const TaskConfig task;
  RewardConfig cfg;
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EnvState s = spawn(task, seed);
    const RewardSpec spec = bind_reward(cfg, task, s);
    for (int t = 0; t < 40; ++t) {
      EXPECT_EQ(step_reward(spec, s), stage_reward(spec.stages, s) + pose_shaping(spec.keyposes, s));
      s = transition(task, s, static_cast<std::size_t>(uniform_int(rng, 0, 6))).state;
    }
  }
}

TEST(Reward, ZeroShapingWeight) {
  const TaskConfig task;
  RewardConfig cfg;
  cfg.shaping_weight = 0.0;
  const EnvState s = spawn(task, 3);
  const RewardSpec spec = bind_reward(cfg, task, s);
  EXPECT_EQ(step_reward(spec, s), stage_reward(spec.stages, s));
}

TEST(Reward, ExpertKeyposesLieOnExpertPath) {
  const TaskConfig task;
  const EnvState s = spawn(task, 10);
  const auto poses = expert_keyposes(task, s);
  ASSERT_EQ(poses.size(), 3u);
  const auto path = expert_rollout(task, s);
  for (const Vec3& pose : poses) {
    EXPECT_TRUE(std::any_of(path.begin(), path.end(),
                            [&](const EnvState& e) { return e.effector == pose; }));
  }
}

TEST(Reward, RewardsAreBounded) {
  const TaskConfig task;
  const RewardConfig cfg;
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    EnvState s = spawn(task, seed);
    const RewardSpec spec = bind_reward(cfg, task, s);
    for (std::size_t t = 0; t < task.max_steps; ++t) {
      const double r = step_reward(spec, s);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, cfg.base_rewards[3] + cfg.shaping_weight);
      s = transition(task, s, static_cast<std::size_t>(uniform_int(rng, 0, 6))).state;
    }
  }
}

TEST(Reward, StageIsMonotoneAlongExpertRollouts) {
  const TaskConfig task;
  const StageSpec spec = bind_reward(RewardConfig{}, task, spawn(task, 0)).stages;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto path = expert_rollout(task, spawn(task, seed));
    Stage previous = Stage::kApproach;
    for (const EnvState& s : path) {
      const Stage stage = detect_stage(spec, s);
      EXPECT_GE(static_cast<int>(stage), static_cast<int>(previous));
      previous = stage;
    }
    EXPECT_EQ(previous, Stage::kPlace);
  }
}

TEST(Reward, HorizonReturnPadsSuccess) {
  const TaskConfig task;
  const EnvState start = spawn(task, 4);
  const RewardSpec spec = bind_reward(RewardConfig{}, task, start);
  std::vector<EnvState> path = expert_rollout(task, start);
  const std::vector<EnvState> visited(path.begin() + 1, path.end());
  ASSERT_TRUE(visited.back().success);
  double manual = 0.0;
  for (const EnvState& s : visited) manual += step_reward(spec, s);
  const double tail = step_reward(spec, visited.back());
  const auto remaining = static_cast<double>(task.max_steps - visited.size());
  EXPECT_DOUBLE_EQ(horizon_return(spec, visited, task.max_steps), manual + remaining * tail);
  std::vector<EnvState> failed(visited.begin(), visited.end() - 1);
  double partial = 0.0;
  for (const EnvState& s : failed) partial += step_reward(spec, s);
  EXPECT_EQ(horizon_return(spec, failed, task.max_steps), partial);
  EXPECT_THROW(horizon_return(spec, visited, 1), ContractError);
}

TEST(Reward, ExpertDominatesRandomRollouts) {
  const TaskConfig task;
  const RewardConfig cfg;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const EnvState start = spawn(task, seed);
    const RewardSpec spec = bind_reward(cfg, task, start);
    const auto path = expert_rollout(task, start);
    const std::vector<EnvState> expert_visited(path.begin() + 1, path.end());
    const double expert = horizon_return(spec, expert_visited, task.max_steps);
    Rng rng(seed);
    for (int k = 0; k < 1000; ++k) {
      EnvState s = start;
      std::vector<EnvState> visited;
      for (std::size_t t = 0; t < task.max_steps && !s.success; ++t) {
        s = transition(task, s, static_cast<std::size_t>(uniform_int(rng, 0, 6))).state;
        visited.push_back(s);
      }
      ASSERT_LT(horizon_return(spec, visited, task.max_steps), expert);
    }
  }
}

TEST(Reward, InvalidRewardConfig) {
  RewardConfig cfg;
  cfg.base_rewards = {0.0, 2.0, 1.0, 3.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RewardConfig{};
  cfg.shaping_weight = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace tgrpo
