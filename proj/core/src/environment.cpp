#include "tgrpo/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgrpo/errors.hpp"
#include "tgrpo/random.hpp"

namespace tgrpo {
namespace {

constexpr std::uint64_t kSpawnStream = 0x5350415756ULL;

Vec3 clamp_to(const TaskConfig& config, Vec3 p) {
  for (int k = 0; k < 3; ++k) {
    p[k] = std::clamp(p[k], config.workspace_low[k], config.workspace_high[k]);
  }
  return p;
}

Vec3 lattice_point(const TaskConfig& config, Rng& rng) {
  const Vec3 c = config.center();
  Vec3 p{};
  for (int k = 0; k < 3; ++k) {
    const double half = 0.5 * (config.workspace_high[k] - config.workspace_low[k]);
    const auto cells = static_cast<std::int64_t>(
        std::floor(config.spawn_fraction * half / config.step_size + 1e-9));
    p[k] = c[k] + static_cast<double>(uniform_int(rng, -cells, cells)) * config.step_size;
  }
  return p;
}

void print_vec(std::ostream& os, const Vec3& v) {
  os << '(' << v[0] << ", " << v[1] << ", " << v[2] << ')';
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 TaskConfig::center() const {
  return {0.5 * (workspace_low[0] + workspace_high[0]),
          0.5 * (workspace_low[1] + workspace_high[1]),
          0.5 * (workspace_low[2] + workspace_high[2])};
}

double TaskConfig::diagonal() const { return distance(workspace_low, workspace_high); }

void TaskConfig::validate() const {
  for (int k = 0; k < 3; ++k) {
    if (!(workspace_high[k] > workspace_low[k])) {
      throw ConfigError("task: workspace_high must exceed workspace_low on every axis");
    }
  }
  if (!(step_size > 0.0)) throw ConfigError("task: step_size must be > 0");
  if (!(grasp_radius >= step_size)) {
    throw ConfigError("task: grasp_radius must be >= step_size");
  }
  if (!(goal_radius > 0.0)) throw ConfigError("task: goal_radius must be > 0");
  if (!(spawn_fraction > 0.0 && spawn_fraction <= 1.0)) {
    throw ConfigError("task: spawn_fraction must lie in (0, 1]");
  }
  if (max_steps == 0) throw ConfigError("task: max_steps must be >= 1");
}

std::string describe(const EnvState& s) {
  std::ostringstream os;
  os << "EnvState{effector=";
  print_vec(os, s.effector);
  os << ", object=";
  print_vec(os, s.object);
  os << ", goal=";
  print_vec(os, s.goal);
  os << ", gripper=" << (s.gripper_closed ? "closed" : "open")
     << ", carried=" << s.carried << ", success=" << s.success << ", step=" << s.step
     << '}';
  return os.str();
}

EnvState spawn(const TaskConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, kSpawnStream, 0));
  EnvState s;
  s.object = lattice_point(config, rng);
  do {
    s.goal = lattice_point(config, rng);
  } while (distance(s.goal, s.object) <= config.goal_radius + config.step_size);
  do {
    s.effector = lattice_point(config, rng);
  } while (distance(s.effector, s.object) <= config.grasp_radius + config.step_size);
  s.effector_start = s.effector;
  s.object_start = s.object;
  return s;
}

StepOutcome transition(const TaskConfig& config, const EnvState& state,
                       std::size_t action) {
  if (action >= kActionCount) {
    throw ContractError("PointManip action " + std::to_string(action) +
                        " out of range [0, 7)");
  }
  EnvState next = state;
  const auto act = static_cast<Action>(action);
  if (act == Action::kToggleGripper) {
    if (!state.gripper_closed) {
      next.gripper_closed = true;
      next.carried = distance(state.effector, state.object) <= config.grasp_radius;
      if (next.carried) next.object = next.effector;
    } else {
      next.gripper_closed = false;
      if (state.carried) {
        next.carried = false;
        next.success = distance(next.object, next.goal) <= config.goal_radius;
      }
    }
  } else {
    const std::size_t axis = action / 2;
    const double sign = (action % 2 == 0) ? 1.0 : -1.0;
    next.effector[axis] += sign * config.step_size;
    next.effector = clamp_to(config, next.effector);
    if (next.carried) next.object = next.effector;
  }
  ++next.step;

  StepOutcome out;
  out.observation = observe(config, next);
  out.success = next.success;
  out.terminal = next.success || next.step >= config.max_steps;
  out.state = next;
  return out;
}

std::vector<double> observe(const TaskConfig& config, const EnvState& state) {
  std::vector<double> obs;
  obs.reserve(kObservationDim);
  const Vec3 c = config.center();
  for (const Vec3* p : {&state.effector, &state.object, &state.goal}) {
    for (int k = 0; k < 3; ++k) {
      const double half = 0.5 * (config.workspace_high[k] - config.workspace_low[k]);
      obs.push_back(((*p)[k] - c[k]) / half);
    }
  }
  obs.push_back(state.gripper_closed ? 1.0 : 0.0);
  obs.push_back(state.carried ? 1.0 : 0.0);
  // Displacements in lattice steps: object - effector, goal - object.
  for (int k = 0; k < 3; ++k) {
    obs.push_back((state.object[k] - state.effector[k]) / config.step_size);
  }
  for (int k = 0; k < 3; ++k) {
    obs.push_back((state.goal[k] - state.object[k]) / config.step_size);
  }
  return obs;
}

std::size_t scripted_expert_action(const TaskConfig& config, const EnvState& state) {
  const Vec3& target = state.carried ? state.goal : state.object;
  // A closed gripper that holds nothing has to reopen before it can grasp.
  if (!state.carried && state.gripper_closed) {
    return static_cast<std::size_t>(Action::kToggleGripper);
  }
  std::size_t best_axis = 0;
  double best_gap = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double gap = target[k] - state.effector[k];
    if (std::abs(gap) > std::abs(best_gap)) {
      best_gap = gap;
      best_axis = k;
    }
  }
  if (std::abs(best_gap) > 0.5 * config.step_size) {
    return 2 * best_axis + (best_gap > 0.0 ? 0 : 1);
  }
  return static_cast<std::size_t>(Action::kToggleGripper);
}

std::vector<EnvState> expert_rollout(const TaskConfig& config, const EnvState& initial) {
  std::vector<EnvState> states{initial};
  EnvState s = initial;
  while (!s.success && s.step < config.max_steps) {
    s = transition(config, s, scripted_expert_action(config, s)).state;
    states.push_back(s);
  }
  return states;
}

GroupEnv::GroupEnv(TaskConfig config, std::uint64_t seed, EnvState initial,
                   std::size_t size)
    : config_(std::move(config)),
      seed_(seed),
      initial_(initial),
      states_(size, initial) {}

GroupEnv GroupEnv::reset_group(const TaskConfig& config, std::uint64_t seed,
                               std::size_t size) {
  if (size < 2) {
    throw ConfigError("group size must be >= 2 (got " + std::to_string(size) + ")");
  }
  return GroupEnv(config, seed, spawn(config, seed), size);
}

std::vector<StepOutcome> GroupEnv::step_group(std::span<const std::size_t> actions) {
  if (actions.size() != states_.size()) {
    throw ContractError("step_group expects " + std::to_string(states_.size()) +
                        " actions, got " + std::to_string(actions.size()));
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] >= kActionCount) {
      throw ContractError("instance " + std::to_string(i) + ": action " +
                          std::to_string(actions[i]) + " out of range");
    }
  }
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    outcomes.push_back(transition(config_, states_[i], actions[i]));
    states_[i] = outcomes.back().state;
  }
  ++step_count_;
  return outcomes;
}

}  // namespace tgrpo
