#ifndef TGRPO_ENVIRONMENT_HPP_
#define TGRPO_ENVIRONMENT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tgrpo {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

// PointManip task parameters. Positions are in workspace units.
struct TaskConfig {
  Vec3 workspace_low{-0.5, -0.5, -0.5};
  Vec3 workspace_high{0.5, 0.5, 0.5};
  // Fraction of the workspace half-extent (around its center) used to spawn
  // the effector, object and goal.
  double spawn_fraction = 0.3;
  // Covers every lattice neighbour (the 3-D diagonal is 0.0866), so an
  // off-axis approach still ends within reach.
  double grasp_radius = 0.09;
  double goal_radius = 0.09;
  double step_size = 0.05;
  std::size_t max_steps = 80;
  std::uint64_t seed = 0;

  Vec3 center() const;
  double diagonal() const;
  void validate() const;

  bool operator==(const TaskConfig&) const = default;
};

// 6 axis moves + gripper toggle.
enum class Action : std::size_t {
  kPosX = 0,
  kNegX,
  kPosY,
  kNegY,
  kPosZ,
  kNegZ,
  kToggleGripper,
};
inline constexpr std::size_t kActionCount = 7;
inline constexpr std::size_t kObservationDim = 17;

struct EnvState {
  Vec3 effector{};
  Vec3 object{};
  Vec3 goal{};
  bool gripper_closed = false;
  bool carried = false;
  bool success = false;
  std::size_t step = 0;
  // Spawn positions; reward progress is measured relative to them.
  Vec3 effector_start{};
  Vec3 object_start{};

  bool operator==(const EnvState&) const = default;
};

std::string describe(const EnvState& state);

struct StepOutcome {
  EnvState state;
  std::vector<double> observation;
  bool success = false;
  bool terminal = false;
};

// Deterministic seeded initial state. Effector, object and goal sit on the
// step-size lattice inside the spawn region.
EnvState spawn(const TaskConfig& config, std::uint64_t seed);

// Deterministic single-instance transition. Throws ContractError on an
// out-of-range action.
StepOutcome transition(const TaskConfig& config, const EnvState& state,
                       std::size_t action);

// [effector, object, goal] scaled to [-1, 1] per axis, gripper-closed and
// carried flags in {0, 1}, then object - effector and goal - object in units
// of step_size.
std::vector<double> observe(const TaskConfig& config, const EnvState& state);

// Greedy axis-aligned solver: approach, close, carry, open.
std::size_t scripted_expert_action(const TaskConfig& config, const EnvState& state);

// Rolls the scripted expert from `initial` until success or max_steps.
std::vector<EnvState> expert_rollout(const TaskConfig& config, const EnvState& initial);

// N lockstep PointManip instances sharing one initial state.
class GroupEnv {
 public:
  // Throws ConfigError when size < 2.
  static GroupEnv reset_group(const TaskConfig& config, std::uint64_t seed,
                              std::size_t size);

  // Advances every instance one step. `actions` holds one action per
  // instance, in instance order.
  std::vector<StepOutcome> step_group(std::span<const std::size_t> actions);

  std::size_t size() const { return states_.size(); }
  std::size_t step_count() const { return step_count_; }
  std::uint64_t seed() const { return seed_; }
  const TaskConfig& config() const { return config_; }
  const EnvState& state(std::size_t index) const { return states_.at(index); }
  std::span<const EnvState> states() const { return states_; }
  const EnvState& initial_state() const { return initial_; }

 private:
  GroupEnv(TaskConfig config, std::uint64_t seed, EnvState initial, std::size_t size);

  TaskConfig config_;
  std::uint64_t seed_ = 0;
  EnvState initial_;
  std::vector<EnvState> states_;
  std::size_t step_count_ = 0;
};

}  // namespace tgrpo

#endif  // TGRPO_ENVIRONMENT_HPP_
