#ifndef TGRPO_TRAINER_HPP_
#define TGRPO_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tgrpo/advantage.hpp"
#include "tgrpo/environment.hpp"
#include "tgrpo/optimizer.hpp"
#include "tgrpo/policy.hpp"
#include "tgrpo/reward.hpp"

namespace tgrpo {

struct TrainConfig {
  std::size_t group_size = 4;
  FusionWeights weights;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  AdamWConfig optimizer{.learning_rate = 1e-3};
  std::size_t updates = 2000;
  std::size_t epochs = 1;
  std::size_t eval_episodes = 100;
  // 0 evaluates only before the first and after the last update.
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{64, 64};
  bool audit_gradients = false;

  // Throws ConfigError naming the violated field.
  void validate() const;
  bool operator==(const TrainConfig&) const;
};

// Learning rate used for LoRA post-training of a 7B VLA; kept as a preset.
inline constexpr double kVlaLearningRate = 1e-5;

Architecture policy_architecture(const TrainConfig& config);

// Seed streams. Training and evaluation initial states come from disjoint
// halves of the 64-bit seed space (top bit clear vs set).
std::uint64_t policy_init_seed(std::uint64_t seed);
std::uint64_t training_env_seed(std::uint64_t seed, std::size_t update);
std::uint64_t sampling_seed(std::uint64_t seed, std::size_t update);
std::uint64_t evaluation_env_seed(std::uint64_t seed, std::size_t episode);

// Anything that picks a PointManip action.
class ActionPolicy {
 public:
  virtual ~ActionPolicy() = default;
  virtual SampledAction act(const EnvState& state, std::span<const double> observation,
                            Rng& rng) const = 0;
};

// Samples from pi(. | observation).
class StochasticPolicy final : public ActionPolicy {
 public:
  explicit StochasticPolicy(const PolicyParams& params) : params_(params) {}
  SampledAction act(const EnvState&, std::span<const double> observation,
                    Rng& rng) const override;

 private:
  const PolicyParams& params_;
};

// argmax_a pi(a | observation); never touches the rng.
class GreedyPolicy final : public ActionPolicy {
 public:
  explicit GreedyPolicy(const PolicyParams& params) : params_(params) {}
  SampledAction act(const EnvState&, std::span<const double> observation,
                    Rng& rng) const override;

 private:
  const PolicyParams& params_;
};

class ExpertPolicy final : public ActionPolicy {
 public:
  explicit ExpertPolicy(TaskConfig task) : task_(std::move(task)) {}
  SampledAction act(const EnvState& state, std::span<const double>,
                    Rng& rng) const override;

 private:
  TaskConfig task_;
};

class UniformRandomPolicy final : public ActionPolicy {
 public:
  SampledAction act(const EnvState&, std::span<const double>, Rng& rng) const override;
};

// N lockstep trajectories of common length M. Per-step tensors are
// row-major: entry (i, t) lives at i * length + t.
struct TrajectoryGroup {
  std::size_t size = 0;
  std::size_t length = 0;
  std::size_t observation_dim = 0;
  std::uint64_t env_seed = 0;
  std::vector<EnvState> states;      // state before action t
  std::vector<double> observations;  // size * length * observation_dim
  std::vector<std::size_t> actions;
  std::vector<double> old_log_probs;
  std::vector<double> rewards;  // reward of the state reached by action t
  std::vector<std::uint8_t> terminal;
  std::vector<std::uint8_t> success;

  bool rectangular() const;
  bool any_success() const;
  RewardMatrix reward_matrix() const;
  std::vector<double> returns() const;
  std::span<const double> observation(std::size_t i, std::size_t t) const;
};

// Steps every instance with `policy` until one instance succeeds or the
// group reaches `max_steps`; all trajectories are cut at that same step.
TrajectoryGroup sample_group(const ActionPolicy& policy, GroupEnv& env,
                             const RewardSpec& reward, std::size_t max_steps, Rng& rng);

// Same, with one policy per instance.
TrajectoryGroup sample_group(std::span<const ActionPolicy* const> policies, GroupEnv& env,
                             const RewardSpec& reward, std::size_t max_steps, Rng& rng);

struct UpdateMetrics {
  double objective = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double mean_abs_advantage = 0.0;
  double grad_norm = 0.0;
  bool applied = false;
  // Set when the update was rejected because of a non-finite value.
  bool aborted = false;
  std::optional<double> audit_max_rel_error;
  std::optional<bool> audit_old_logp_match;
};

// Runs config.epochs AdamW steps on the negated objective. A gradient that
// is exactly zero skips the optimizer step; a non-finite gradient or update
// leaves `policy` untouched and sets `aborted`.
UpdateMetrics update_step(const TrajectoryGroup& group, PolicyParams& policy,
                          const PolicySnapshot& old_snapshot,
                          const PolicySnapshot& ref_snapshot, const TrainConfig& config,
                          OptimizerState& optimizer,
                          const AdvantageTensor* precomputed = nullptr);

// Largest relative deviation between two gradient vectors, component-wise
// |a - b| / max(|a|, |b|, floor).
double max_relative_error(std::span<const double> analytic,
                          std::span<const double> numeric, double floor = 1e-6);

// Central-difference gradient of the loss (-objective) for the group.
std::vector<double> finite_difference_loss_gradient(const TrajectoryGroup& group,
                                                    const PolicyParams& policy,
                                                    const PolicySnapshot& ref_snapshot,
                                                    const AdvantageTensor& advantages,
                                                    const TrainConfig& config,
                                                    double step = 1e-5);

struct EvalResult {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
};

// Runs `episodes` fresh evaluation episodes (seeds from evaluation_env_seed)
// and reports the success fraction and mean undiscounted return.
EvalResult evaluate(const ActionPolicy& policy, const TaskConfig& task,
                    const RewardConfig& reward, std::size_t episodes, std::uint64_t seed,
                    bool parallel = false);

// Greedy evaluation of a parameter set.
EvalResult evaluate(const PolicyParams& params, const TaskConfig& task,
                    const RewardConfig& reward, std::size_t episodes, std::uint64_t seed,
                    bool parallel = false);

struct TrainHooks {
  // One JSON object per line.
  std::ostream* metrics = nullptr;
  // Called after advantages are computed, before the update.
  std::function<void(std::size_t update, const TrajectoryGroup&, const AdvantageTensor&)>
      on_group;
  bool parallel_eval = false;
};

struct TrainResult {
  PolicyParams policy;
  OptimizerState optimizer;
  std::uint64_t reference_digest = 0;
  EvalResult initial_eval;
  EvalResult final_eval;
  std::size_t updates_run = 0;
};

// The online post-training loop: for each update, snapshot the policy,
// reset a group from a fresh seed, sample, compute fused advantages and take
// an AdamW step. Evaluates greedily before, periodically and after training.
// Module errors are logged to the metrics stream, then rethrown.
TrainResult train(const TrainConfig& config, const TaskConfig& task,
                  const RewardConfig& reward, const TrainHooks& hooks = {});

}  // namespace tgrpo

#endif  // TGRPO_TRAINER_HPP_
