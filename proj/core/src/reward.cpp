#include "tgrpo/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgrpo/errors.hpp"

namespace tgrpo {
namespace {

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// 1 at d = target, 0 at d = start, linear in between.
double closing_progress(double d, double start, double target) {
  if (start <= target) return 1.0;
  return clip01(1.0 - (d - target) / (start - target));
}

}  // namespace

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::kApproach: return "approach";
    case Stage::kGrasp: return "grasp";
    case Stage::kMove: return "move";
    case Stage::kPlace: return "place";
  }
  return "unknown";
}

void StageSpec::validate() const {
  for (std::size_t s = 0; s + 1 < kStageCount; ++s) {
    if (!(base_rewards[s] < base_rewards[s + 1])) {
      throw ConfigError("reward: stage base rewards must be strictly increasing");
    }
  }
  if (!(progress_fraction >= 0.0 && progress_fraction < 1.0)) {
    throw ConfigError("reward: progress_fraction must lie in [0, 1)");
  }
  if (!(grasp_radius > 0.0) || !(goal_radius > 0.0)) {
    throw ConfigError("reward: radii must be > 0");
  }
}

void KeyposeSet::validate() const {
  if (poses.empty()) throw ConfigError("reward: keypose set must hold >= 1 pose");
  if (!(weight >= 0.0)) throw ConfigError("reward: shaping weight must be >= 0");
  if (!(length_scale > 0.0)) throw ConfigError("reward: length scale must be > 0");
}

void RewardConfig::validate() const {
  StageSpec probe;
  probe.base_rewards = base_rewards;
  probe.progress_fraction = progress_fraction;
  probe.validate();
  if (!(shaping_weight >= 0.0)) throw ConfigError("reward: shaping_weight must be >= 0");
  if (std::isnan(length_scale)) throw ConfigError("reward: length_scale is NaN");
}

std::vector<Vec3> expert_keyposes(const TaskConfig& task, const EnvState& initial) {
  const std::vector<EnvState> rollout = expert_rollout(task, initial);
  std::vector<Vec3> carry_path;
  Vec3 grasp_pose = initial.effector;
  Vec3 release_pose = initial.effector;
  for (std::size_t t = 1; t < rollout.size(); ++t) {
    const EnvState& prev = rollout[t - 1];
    const EnvState& cur = rollout[t];
    if (!prev.carried && cur.carried) grasp_pose = cur.effector;
    if (prev.carried && !cur.carried) release_pose = cur.effector;
    if (cur.carried) carry_path.push_back(cur.effector);
  }
  const Vec3 lift_pose =
      carry_path.empty() ? grasp_pose : carry_path[carry_path.size() / 2];
  return {grasp_pose, lift_pose, release_pose};
}

RewardSpec bind_reward(const RewardConfig& config, const TaskConfig& task,
                       const EnvState& initial) {
  config.validate();
  RewardSpec spec;
  spec.stages.base_rewards = config.base_rewards;
  spec.stages.progress_fraction = config.progress_fraction;
  spec.stages.grasp_radius = task.grasp_radius;
  spec.stages.goal_radius = task.goal_radius;
  spec.keyposes.weight = config.shaping_weight;
  spec.keyposes.length_scale =
      config.length_scale > 0.0 ? config.length_scale : 0.5 * task.diagonal();
  spec.keyposes.poses = config.explicit_keyposes.empty()
                            ? expert_keyposes(task, initial)
                            : config.explicit_keyposes;
  spec.validate();
  return spec;
}

Stage detect_stage(const StageSpec& spec, const EnvState& state) {
  // Comparisons are written so that a non-finite distance matches nothing.
  const double to_goal = distance(state.object, state.goal);
  const double to_object = distance(state.effector, state.object);
  const bool placed = !state.carried && to_goal <= spec.goal_radius;
  const bool away = !state.carried && to_goal > spec.goal_radius;
  const std::array<bool, kStageCount> active{
      away && to_object > spec.grasp_radius,
      away && to_object <= spec.grasp_radius,
      state.carried && std::isfinite(to_object) && std::isfinite(to_goal),
      placed,
  };
  const auto matches = std::count(active.begin(), active.end(), true);
  if (matches != 1) {
    throw SpecificationError("reward: " + std::to_string(matches) +
                             " stage predicates match " + describe(state));
  }
  return static_cast<Stage>(std::find(active.begin(), active.end(), true) -
                            active.begin());
}

double stage_progress(const StageSpec& spec, Stage stage, const EnvState& state) {
  switch (stage) {
    case Stage::kApproach:
      return closing_progress(distance(state.effector, state.object),
                              distance(state.effector_start, state.object_start),
                              spec.grasp_radius);
    case Stage::kGrasp:
      return clip01(1.0 - distance(state.effector, state.object) / spec.grasp_radius);
    case Stage::kMove:
      return closing_progress(distance(state.object, state.goal),
                              distance(state.object_start, state.goal), 0.0);
    case Stage::kPlace:
      return 1.0;
  }
  return 0.0;
}

double stage_reward(const StageSpec& spec, const EnvState& state) {
  const Stage stage = detect_stage(spec, state);
  const auto s = static_cast<std::size_t>(stage);
  if (s + 1 == kStageCount) return spec.base_rewards[s];
  const double gap = spec.base_rewards[s + 1] - spec.base_rewards[s];
  return spec.base_rewards[s] +
         spec.progress_fraction * gap * stage_progress(spec, stage, state);
}

double pose_shaping(const KeyposeSet& keyposes, const EnvState& state) {
  double nearest = std::numeric_limits<double>::infinity();
  for (const Vec3& pose : keyposes.poses) {
    nearest = std::min(nearest, distance(pose, state.effector));
  }
  return keyposes.weight * std::exp(-nearest / keyposes.length_scale);
}

double step_reward(const RewardSpec& spec, const EnvState& state) {
  return stage_reward(spec.stages, state) + pose_shaping(spec.keyposes, state);
}

double horizon_return(const RewardSpec& spec, std::span<const EnvState> visited,
                      std::size_t horizon) {
  if (visited.size() > horizon) {
    throw ContractError("horizon_return: " + std::to_string(visited.size()) +
                        " states exceed horizon " + std::to_string(horizon));
  }
  double total = 0.0;
  for (const EnvState& state : visited) total += step_reward(spec, state);
  if (!visited.empty() && visited.back().success) {
    total += static_cast<double>(horizon - visited.size()) * step_reward(spec, visited.back());
  }
  return total;
}

}  // namespace tgrpo
