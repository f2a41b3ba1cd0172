#ifndef TGRPO_REWARD_HPP_
#define TGRPO_REWARD_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tgrpo/environment.hpp"

namespace tgrpo {

enum class Stage : std::size_t { kApproach = 0, kGrasp = 1, kMove = 2, kPlace = 3 };
inline constexpr std::size_t kStageCount = 4;

const char* stage_name(Stage stage);

// Ordered PointManip stages. Predicates are fixed:
//   approach: not carried, not placed, effector outside grasp radius
//   grasp:    not carried, not placed, effector inside grasp radius
//   move:     carried
//   place:    not carried, object inside goal radius
struct StageSpec {
  std::array<double, kStageCount> base_rewards{0.0, 1.0, 2.0, 6.0};
  // Share of the gap to the next stage base that within-stage progress can earn.
  double progress_fraction = 0.9;
  double grasp_radius = 0.09;
  double goal_radius = 0.09;

  void validate() const;
  bool operator==(const StageSpec&) const = default;
};

struct KeyposeSet {
  std::vector<Vec3> poses;
  double weight = 0.5;
  double length_scale = 0.8660254037844386;

  void validate() const;
  bool operator==(const KeyposeSet&) const = default;
};

struct RewardSpec {
  StageSpec stages;
  KeyposeSet keyposes;

  void validate() const {
    stages.validate();
    keyposes.validate();
  }
  bool operator==(const RewardSpec&) const = default;
};

// Reward settings as stored in a config file. When `explicit_keyposes` is
// empty the keyposes are recorded from the scripted expert on each initial
// state (see bind_reward).
struct RewardConfig {
  // The completion base sits well above the move stage's ceiling (2.9) so that
  // releasing at the goal clearly beats hovering over it.
  std::array<double, kStageCount> base_rewards{0.0, 1.0, 2.0, 6.0};
  double progress_fraction = 0.9;
  double shaping_weight = 0.5;
  // <= 0 selects half the workspace diagonal.
  double length_scale = 0.0;
  std::vector<Vec3> explicit_keyposes;

  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

// Pre-grasp, mid-carry and pre-place effector poses of the scripted expert
// starting from `initial`.
std::vector<Vec3> expert_keyposes(const TaskConfig& task, const EnvState& initial);

// Concrete RewardSpec for one initial state.
RewardSpec bind_reward(const RewardConfig& config, const TaskConfig& task,
                       const EnvState& initial);

// Throws SpecificationError (with a state dump) unless exactly one stage
// predicate holds.
Stage detect_stage(const StageSpec& spec, const EnvState& state);

// Within-stage progress in [0, 1] for `stage`, evaluated on `state` regardless
// of which stage is active.
double stage_progress(const StageSpec& spec, Stage stage, const EnvState& state);

// f1: base reward of the active stage plus progress bonus.
double stage_reward(const StageSpec& spec, const EnvState& state);

// f2: weight * exp(-d / length_scale), d = distance to the nearest keypose.
double pose_shaping(const KeyposeSet& keyposes, const EnvState& state);

// f1 + f2.
double step_reward(const RewardSpec& spec, const EnvState& state);

// Undiscounted return over a fixed horizon. `visited` holds the state reached
// by each action in order. A successful final state is absorbing: it keeps
// earning its reward for the remaining steps up to `horizon`.
double horizon_return(const RewardSpec& spec, std::span<const EnvState> visited,
                      std::size_t horizon);

}  // namespace tgrpo

#endif  // TGRPO_REWARD_HPP_
