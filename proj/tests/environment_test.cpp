#include <gtest/gtest.h>

#include <vector>

#include "tgrpo/environment.hpp"
#include "tgrpo/errors.hpp"
#include "tgrpo/random.hpp"

namespace tgrpo {
namespace {

EnvState origin_state() {
  EnvState s;
  s.effector = {0.0, 0.0, 0.0};
  s.object = {0.2, 0.0, 0.0};
  s.goal = {-0.2, 0.1, 0.0};
  s.effector_start = s.effector;
  s.object_start = s.object;
  return s;
}

TEST(Environment, GroupInstancesStartEqual) {
  const TaskConfig cfg;
  GroupEnv env = GroupEnv::reset_group(cfg, 7, 4);
  ASSERT_EQ(env.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(env.state(i), env.state(j));
  }
  EXPECT_EQ(env.state(0), env.initial_state());
}

TEST(Environment, SeedsGiveDifferentObjects) {
  const TaskConfig cfg;
  EXPECT_NE(spawn(cfg, 7).object, spawn(cfg, 8).object);
}

TEST(Environment, GroupOfOneIsConfigError) {
  EXPECT_THROW(GroupEnv::reset_group(TaskConfig{}, 7, 1), ConfigError);
}

TEST(Environment, MovePlusX) {
  const TaskConfig cfg;
  const StepOutcome out =
      transition(cfg, origin_state(), static_cast<std::size_t>(Action::kPosX));
  EXPECT_DOUBLE_EQ(out.state.effector[0], 0.05);
  EXPECT_EQ(out.state.effector[1], 0.0);
  EXPECT_EQ(out.state.effector[2], 0.0);
  EXPECT_EQ(out.state.step, 1u);
}

TEST(Environment, MovesClampToWorkspace) {
  const TaskConfig cfg;
  EnvState s = origin_state();
  s.effector = {0.49, 0.0, 0.0};
  const StepOutcome out = transition(cfg, s, static_cast<std::size_t>(Action::kPosX));
  EXPECT_EQ(out.state.effector[0], 0.5);
}

TEST(Environment, CloseNearObjectCarries) {
  const TaskConfig cfg;
  EnvState s = origin_state();
  s.effector = {0.2 - 0.5 * cfg.grasp_radius, 0.0, 0.0};
  const StepOutcome out =
      transition(cfg, s, static_cast<std::size_t>(Action::kToggleGripper));
  EXPECT_TRUE(out.state.gripper_closed);
  EXPECT_TRUE(out.state.carried);
  EXPECT_EQ(out.state.object, out.state.effector);
}

TEST(Environment, CloseFarFromObjectDoesNotCarry) {
  const TaskConfig cfg;
  const StepOutcome out = transition(cfg, origin_state(),
                                     static_cast<std::size_t>(Action::kToggleGripper));
  EXPECT_TRUE(out.state.gripper_closed);
  EXPECT_FALSE(out.state.carried);
}

TEST(Environment, OpenInsideGoalSucceeds) {
  const TaskConfig cfg;
  EnvState s = origin_state();
  s.gripper_closed = true;
  s.carried = true;
  s.effector = {-0.2, 0.1 + 0.5 * cfg.goal_radius, 0.0};
  s.object = s.effector;
  const StepOutcome out =
      transition(cfg, s, static_cast<std::size_t>(Action::kToggleGripper));
  EXPECT_FALSE(out.state.carried);
  EXPECT_TRUE(out.state.success);
  EXPECT_TRUE(out.success);
  EXPECT_TRUE(out.terminal);
}

TEST(Environment, OpenOutsideGoalDropsObject) {
  const TaskConfig cfg;
  EnvState s = origin_state();
  s.gripper_closed = true;
  s.carried = true;
  s.object = s.effector;
  const StepOutcome out =
      transition(cfg, s, static_cast<std::size_t>(Action::kToggleGripper));
  EXPECT_FALSE(out.state.carried);
  EXPECT_FALSE(out.state.success);
}

TEST(Environment, ActionOutOfRangeIsContractError) {
  EXPECT_THROW(transition(TaskConfig{}, origin_state(), kActionCount), ContractError);
  GroupEnv env = GroupEnv::reset_group(TaskConfig{}, 1, 2);
  const std::vector<std::size_t> bad{0, 99};
  EXPECT_THROW(env.step_group(bad), ContractError);
  const std::vector<std::size_t> short_list{0};
  EXPECT_THROW(env.step_group(short_list), ContractError);
}

TEST(Environment, CenteredStateObservesZeros) {
  const TaskConfig cfg;
  EnvState s;
  const std::vector<double> obs = observe(cfg, s);
  ASSERT_EQ(obs.size(), kObservationDim);
  for (double v : obs) EXPECT_EQ(v, 0.0);
}

TEST(Environment, ObservationIsPureAndFixedLength) {
  const TaskConfig cfg;
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EnvState s = spawn(cfg, seed);
    for (int t = 0; t < 30; ++t) {
      const auto obs = observe(cfg, s);
      EXPECT_EQ(obs.size(), kObservationDim);
      EnvState copy = s;
      EXPECT_EQ(observe(cfg, copy), obs);
      s = transition(cfg, s, static_cast<std::size_t>(uniform_int(rng, 0, 6))).state;
    }
  }
}

TEST(Environment, StepGroupIsLockstep) {
  GroupEnv env = GroupEnv::reset_group(TaskConfig{}, 12, 3);
  const std::vector<std::size_t> actions{0, 2, 4};
  const auto out = env.step_group(actions);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(env.step_count(), 1u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(out[i].state, env.state(i));
    EXPECT_EQ(out[i].state.step, 1u);
  }
}

TEST(Environment, TransitionsAreDeterministic) {
  const TaskConfig cfg;
  Rng a(8);
  EnvState s = spawn(cfg, 99);
  EnvState t = spawn(cfg, 99);
  for (int k = 0; k < 60; ++k) {
    const auto action = static_cast<std::size_t>(uniform_int(a, 0, 6));
    s = transition(cfg, s, action).state;
    t = transition(cfg, t, action).state;
    ASSERT_EQ(s, t);
  }
}

TEST(Environment, InvariantsHoldAlongRandomRollouts) {
  const TaskConfig cfg;
  Rng rng(21);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EnvState s = spawn(cfg, seed);
    for (std::size_t t = 0; t < cfg.max_steps; ++t) {
      s = transition(cfg, s, static_cast<std::size_t>(uniform_int(rng, 0, 6))).state;
      for (std::size_t k = 0; k < 3; ++k) {
        ASSERT_GE(s.effector[k], cfg.workspace_low[k]);
        ASSERT_LE(s.effector[k], cfg.workspace_high[k]);
      }
      if (s.carried) {
        ASSERT_TRUE(s.gripper_closed);
        ASSERT_EQ(s.object, s.effector);
      }
      if (s.success) break;
    }
  }
}

TEST(Environment, ExpertSolvesSpawnedStates) {
  const TaskConfig cfg;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::vector<EnvState> path = expert_rollout(cfg, spawn(cfg, seed));
    ASSERT_FALSE(path.empty());
    EXPECT_TRUE(path.back().success) << describe(path.front());
    EXPECT_LE(path.back().step, cfg.max_steps);
  }
}

TEST(Environment, InvalidTaskConfig) {
  TaskConfig cfg;
  cfg.step_size = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TaskConfig{};
  cfg.max_steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace tgrpo
