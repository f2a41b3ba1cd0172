#include "tgrpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tgrpo/diagnostics.hpp"
#include "tgrpo/errors.hpp"
#include "tgrpo/objective.hpp"

namespace tgrpo {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainEnvStream = 2;
constexpr std::uint64_t kSamplingStream = 3;
constexpr std::uint64_t kEvalEnvStream = 4;
constexpr std::uint64_t kEvalSamplingStream = 5;
constexpr std::uint64_t kTopBit = 1ULL << 63;

LossBatch make_batch(const TrajectoryGroup& group, const PolicySnapshot& ref,
                     const AdvantageTensor& adv, const TrainConfig& config) {
  LossBatch batch;
  batch.rows = group.size;
  batch.cols = group.length;
  batch.logp_old = group.old_log_probs;
  batch.advantages = adv.fused;
  batch.clip_epsilon = config.clip_epsilon;
  batch.kl_beta = config.kl_beta;
  refresh_current_logp(batch, ref.params(), group.observations, group.actions);
  batch.logp_ref = batch.logp_current;
  return batch;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double episode_return(const ActionPolicy& policy, const TaskConfig& task,
                      const RewardConfig& reward, std::uint64_t seed,
                      std::size_t episode, bool& success) {
  EnvState state = spawn(task, evaluation_env_seed(seed, episode));
  const RewardSpec spec = bind_reward(reward, task, state);
  Rng rng(derive_seed(seed, kEvalSamplingStream, episode));
  std::vector<EnvState> visited;
  while (state.step < task.max_steps && !state.success) {
    const std::vector<double> obs = observe(task, state);
    const SampledAction choice = policy.act(state, obs, rng);
    state = transition(task, state, choice.action).state;
    visited.push_back(state);
  }
  success = state.success;
  return horizon_return(spec, visited, task.max_steps);
}

nlohmann::json eval_json(const EvalResult& r) {
  return {{"episodes", r.episodes}, {"success_rate", r.success_rate},
          {"mean_return", r.mean_return}};
}

void emit(std::ostream* out, const nlohmann::json& line) {
  if (out == nullptr) return;
  *out << line.dump() << '\n';
  out->flush();
}

}  // namespace

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("train.group_size must be >= 2");
  weights.validate();
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ConfigError("train.clip_epsilon must lie in (0, 1)");
  }
  if (!(kl_beta >= 0.0)) throw ConfigError("train.kl_beta must be >= 0");
  optimizer.validate();
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (eval_episodes == 0) throw ConfigError("train.eval_episodes must be >= 1");
  policy_architecture(*this).validate();
}

bool TrainConfig::operator==(const TrainConfig& o) const {
  return group_size == o.group_size && weights.alpha_step == o.weights.alpha_step &&
         weights.alpha_traj == o.weights.alpha_traj && clip_epsilon == o.clip_epsilon &&
         kl_beta == o.kl_beta && optimizer == o.optimizer && updates == o.updates &&
         epochs == o.epochs && eval_episodes == o.eval_episodes &&
         eval_every == o.eval_every && seed == o.seed && hidden == o.hidden &&
         audit_gradients == o.audit_gradients;
}

Architecture policy_architecture(const TrainConfig& config) {
  return Architecture{kObservationDim, config.hidden, kActionCount};
}

std::uint64_t policy_init_seed(std::uint64_t seed) {
  return derive_seed(seed, kInitStream, 0);
}
std::uint64_t training_env_seed(std::uint64_t seed, std::size_t update) {
  return derive_seed(seed, kTrainEnvStream, update) & ~kTopBit;
}
std::uint64_t sampling_seed(std::uint64_t seed, std::size_t update) {
  return derive_seed(seed, kSamplingStream, update);
}
std::uint64_t evaluation_env_seed(std::uint64_t seed, std::size_t episode) {
  return derive_seed(seed, kEvalEnvStream, episode) | kTopBit;
}

SampledAction StochasticPolicy::act(const EnvState&, std::span<const double> observation,
                                    Rng& rng) const {
  return sample_action(forward(params_, observation), rng);
}

SampledAction GreedyPolicy::act(const EnvState&, std::span<const double> observation,
                                Rng&) const {
  const ActionDistribution dist = forward(params_, observation);
  const std::size_t a = dist.argmax();
  return SampledAction{a, dist.log_probs[a]};
}

SampledAction ExpertPolicy::act(const EnvState& state, std::span<const double>,
                                Rng&) const {
  return SampledAction{scripted_expert_action(task_, state), 0.0};
}

SampledAction UniformRandomPolicy::act(const EnvState&, std::span<const double>,
                                       Rng& rng) const {
  const auto a = static_cast<std::size_t>(
      uniform_int(rng, 0, static_cast<std::int64_t>(kActionCount) - 1));
  return SampledAction{a, -std::log(static_cast<double>(kActionCount))};
}

bool TrajectoryGroup::rectangular() const {
  const std::size_t cells = size * length;
  return states.size() == cells && actions.size() == cells &&
         old_log_probs.size() == cells && rewards.size() == cells &&
         observations.size() == cells * observation_dim && terminal.size() == size &&
         success.size() == size;
}

bool TrajectoryGroup::any_success() const {
  return std::any_of(success.begin(), success.end(), [](std::uint8_t s) { return s != 0; });
}

RewardMatrix TrajectoryGroup::reward_matrix() const {
  return RewardMatrix(size, length, rewards);
}

std::vector<double> TrajectoryGroup::returns() const {
  std::vector<double> out(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t t = 0; t < length; ++t) out[i] += rewards[i * length + t];
  }
  return out;
}

std::span<const double> TrajectoryGroup::observation(std::size_t i, std::size_t t) const {
  return std::span<const double>(observations)
      .subspan((i * length + t) * observation_dim, observation_dim);
}

TrajectoryGroup sample_group(const ActionPolicy& policy, GroupEnv& env,
                             const RewardSpec& reward, std::size_t max_steps, Rng& rng) {
  std::vector<const ActionPolicy*> policies(env.size(), &policy);
  return sample_group(policies, env, reward, max_steps, rng);
}

TrajectoryGroup sample_group(std::span<const ActionPolicy* const> policies, GroupEnv& env,
                             const RewardSpec& reward, std::size_t max_steps, Rng& rng) {
  const std::size_t n = env.size();
  if (policies.size() != n) {
    throw ContractError("sample_group: need one policy per group instance");
  }
  if (env.step_count() != 0) throw ContractError("sample_group: group was not freshly reset");
  if (max_steps == 0) throw ContractError("sample_group: max_steps must be >= 1");

  // Per-trajectory buffers, flattened once the common length is known.
  std::vector<std::vector<EnvState>> states(n);
  std::vector<std::vector<double>> observations(n);
  std::vector<std::vector<std::size_t>> actions(n);
  std::vector<std::vector<double>> log_probs(n);
  std::vector<std::vector<double>> rewards(n);
  std::vector<std::uint8_t> success(n, 0);
  std::vector<std::size_t> chosen(n);

  bool stop = false;
  std::size_t length = 0;
  while (!stop && length < max_steps) {
    for (std::size_t i = 0; i < n; ++i) {
      const EnvState& s = env.state(i);
      const std::vector<double> obs = observe(env.config(), s);
      const SampledAction a = policies[i]->act(s, obs, rng);
      states[i].push_back(s);
      observations[i].insert(observations[i].end(), obs.begin(), obs.end());
      actions[i].push_back(a.action);
      log_probs[i].push_back(a.log_prob);
      chosen[i] = a.action;
    }
    std::vector<StepOutcome> outcomes;
    try {
      outcomes = env.step_group(chosen);
    } catch (const ContractError& e) {
      throw ContractError(std::string("sample_group step ") + std::to_string(length) +
                          ": " + e.what());
    }
    for (std::size_t i = 0; i < n; ++i) {
      try {
        rewards[i].push_back(step_reward(reward, outcomes[i].state));
      } catch (const SpecificationError& e) {
        throw SpecificationError("trajectory " + std::to_string(i) + ": " + e.what());
      }
      if (outcomes[i].success) {
        success[i] = 1;
        stop = true;
      }
    }
    ++length;
  }

  TrajectoryGroup group;
  group.size = n;
  group.length = length;
  group.observation_dim = kObservationDim;
  group.env_seed = env.seed();
  group.success = success;
  group.terminal.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    group.states.insert(group.states.end(), states[i].begin(), states[i].end());
    group.observations.insert(group.observations.end(), observations[i].begin(),
                              observations[i].end());
    group.actions.insert(group.actions.end(), actions[i].begin(), actions[i].end());
    group.old_log_probs.insert(group.old_log_probs.end(), log_probs[i].begin(),
                               log_probs[i].end());
    group.rewards.insert(group.rewards.end(), rewards[i].begin(), rewards[i].end());
  }
  return group;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor) {
  if (analytic.size() != numeric.size()) {
    throw ContractError("max_relative_error: size mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric[k]), floor});
    worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / scale);
  }
  return worst;
}

std::vector<double> finite_difference_loss_gradient(const TrajectoryGroup& group,
                                                    const PolicyParams& policy,
                                                    const PolicySnapshot& ref_snapshot,
                                                    const AdvantageTensor& advantages,
                                                    const TrainConfig& config,
                                                    double step) {
  LossBatch batch = make_batch(group, ref_snapshot, advantages, config);
  PolicyParams probe = policy;
  std::vector<double> grad(policy.size(), 0.0);
  for (std::size_t p = 0; p < policy.size(); ++p) {
    const double saved = probe.values()[p];
    probe.mutable_values()[p] = saved + step;
    refresh_current_logp(batch, probe, group.observations, group.actions);
    const double plus = -tgrpo_objective(batch);
    probe.mutable_values()[p] = saved - step;
    refresh_current_logp(batch, probe, group.observations, group.actions);
    const double minus = -tgrpo_objective(batch);
    probe.mutable_values()[p] = saved;
    grad[p] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

UpdateMetrics update_step(const TrajectoryGroup& group, PolicyParams& policy,
                          const PolicySnapshot& old_snapshot,
                          const PolicySnapshot& ref_snapshot, const TrainConfig& config,
                          OptimizerState& optimizer, const AdvantageTensor* precomputed) {
  if (!group.rectangular()) throw ContractError("update_step: trajectory group is ragged");
  config.weights.validate();
  const AdvantageTensor adv = precomputed != nullptr
                                  ? *precomputed
                                  : compute_advantages(group.reward_matrix(), config.weights);
  LossBatch batch = make_batch(group, ref_snapshot, adv, config);

  UpdateMetrics metrics;
  if (config.audit_gradients) {
    std::vector<double> replay(batch.logp_old.size());
    for (std::size_t k = 0; k < replay.size(); ++k) {
      replay[k] = forward(old_snapshot.params(),
                          std::span<const double>(group.observations)
                              .subspan(k * group.observation_dim, group.observation_dim))
                      .log_probs[group.actions[k]];
    }
    metrics.audit_old_logp_match = (replay == batch.logp_old);
  }

  PolicyParams working = policy;
  OptimizerState working_opt = optimizer;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> grad;
    try {
      refresh_current_logp(batch, working, group.observations, group.actions);
      const ObjectiveStats stats = objective_stats(batch);
      metrics.objective = stats.objective;
      metrics.mean_kl = stats.mean_kl;
      metrics.clip_fraction = stats.clip_fraction;
      metrics.mean_abs_advantage = stats.mean_abs_advantage;
      grad = tgrpo_gradient(batch, working, group.observations, group.actions);
    } catch (const NumericalError& e) {
      diag::warn(std::string("update aborted, previous parameters kept: ") + e.what());
      metrics.aborted = true;
      metrics.applied = false;
      return metrics;
    }
    metrics.grad_norm = l2_norm(grad);
    if (config.audit_gradients && epoch == 0) {
      const std::vector<double> numeric =
          finite_difference_loss_gradient(group, working, ref_snapshot, adv, config);
      metrics.audit_max_rel_error = max_relative_error(grad, numeric);
    }
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) {
      continue;  // uninformative group
    }
    adamw_step(working.mutable_values(), grad, working_opt);
    if (!working.all_finite()) {
      diag::warn("update aborted: non-finite parameters after AdamW step");
      metrics.aborted = true;
      metrics.applied = false;
      return metrics;
    }
    metrics.applied = true;
  }
  if (metrics.applied) {
    policy = std::move(working);
    optimizer = std::move(working_opt);
  }
  return metrics;
}

EvalResult evaluate(const ActionPolicy& policy, const TaskConfig& task,
                    const RewardConfig& reward, std::size_t episodes, std::uint64_t seed,
                    bool parallel) {
  if (episodes == 0) throw ContractError("evaluate: episodes must be >= 1");
  std::vector<double> returns(episodes, 0.0);
  std::vector<std::uint8_t> successes(episodes, 0);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      bool ok = false;
      returns[e] = episode_return(policy, task, reward, seed, e, ok);
      successes[e] = ok ? 1 : 0;
    }
  };
  const std::size_t workers =
      parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : 1;
  if (workers <= 1 || episodes < 2) {
    run_range(0, episodes);
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (episodes + workers - 1) / workers;
    for (std::size_t begin = 0; begin < episodes; begin += chunk) {
      jobs.push_back(std::async(std::launch::async, run_range, begin,
                                std::min(episodes, begin + chunk)));
    }
    for (auto& job : jobs) job.get();
  }
  EvalResult result;
  result.episodes = episodes;
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    result.successes += successes[e];
    total += returns[e];
  }
  result.success_rate =
      static_cast<double>(result.successes) / static_cast<double>(episodes);
  result.mean_return = total / static_cast<double>(episodes);
  return result;
}

EvalResult evaluate(const PolicyParams& params, const TaskConfig& task,
                    const RewardConfig& reward, std::size_t episodes, std::uint64_t seed,
                    bool parallel) {
  return evaluate(GreedyPolicy(params), task, reward, episodes, seed, parallel);
}

TrainResult train(const TrainConfig& config, const TaskConfig& task,
                  const RewardConfig& reward, const TrainHooks& hooks) {
  config.validate();
  task.validate();
  reward.validate();

  PolicyParams policy = init_policy(policy_architecture(config), policy_init_seed(config.seed));
  const PolicySnapshot reference(policy, SnapshotTag::kReference);
  OptimizerState optimizer = OptimizerState::for_parameters(policy.size(), config.optimizer);

  TrainResult result{policy, optimizer, reference.digest(), {}, {}, 0};
  result.initial_eval = evaluate(policy, task, reward, config.eval_episodes, config.seed,
                                 hooks.parallel_eval);
  emit(hooks.metrics, {{"update", 0}, {"eval", eval_json(result.initial_eval)}});

  std::size_t k = 0;
  try {
    for (; k < config.updates; ++k) {
      const PolicySnapshot old_snapshot(policy, SnapshotTag::kOld);
      GroupEnv env = GroupEnv::reset_group(task, training_env_seed(config.seed, k),
                                           config.group_size);
      const RewardSpec spec = bind_reward(reward, task, env.initial_state());
      Rng rng(sampling_seed(config.seed, k));
      const TrajectoryGroup group = sample_group(StochasticPolicy(old_snapshot.params()),
                                                 env, spec, task.max_steps, rng);
      const AdvantageTensor adv = compute_advantages(group.reward_matrix(), config.weights);
      if (hooks.on_group) hooks.on_group(k, group, adv);
      const UpdateMetrics m =
          update_step(group, policy, old_snapshot, reference, config, optimizer, &adv);

      const std::vector<double> returns = group.returns();
      double mean_return = 0.0;
      for (double r : returns) mean_return += r;
      mean_return /= static_cast<double>(returns.size());

      nlohmann::json line = {{"update", k + 1},
                             {"objective", m.objective},
                             {"kl", m.mean_kl},
                             {"clip_fraction", m.clip_fraction},
                             {"mean_abs_adv", m.mean_abs_advantage},
                             {"grad_norm", m.grad_norm},
                             {"group_length", group.length},
                             {"group_success", group.any_success()},
                             {"mean_return", mean_return},
                             {"applied", m.applied}};
      if (m.aborted) line["aborted"] = true;
      if (m.audit_max_rel_error) line["audit_max_rel_error"] = *m.audit_max_rel_error;
      if (m.audit_old_logp_match) line["audit_old_logp_match"] = *m.audit_old_logp_match;
      const bool last = k + 1 == config.updates;
      if (last || (config.eval_every > 0 && (k + 1) % config.eval_every == 0)) {
        const EvalResult ev = evaluate(policy, task, reward, config.eval_episodes,
                                       config.seed, hooks.parallel_eval);
        line["eval"] = eval_json(ev);
        if (last) result.final_eval = ev;
      }
      emit(hooks.metrics, line);
    }
  } catch (const std::exception& e) {
    emit(hooks.metrics, {{"update", k + 1}, {"error", e.what()}});
    throw;
  }
  if (config.updates == 0) result.final_eval = result.initial_eval;
  if (PolicySnapshot(reference).digest() != result.reference_digest) {
    throw ContractError("reference policy changed during training");
  }
  result.policy = std::move(policy);
  result.optimizer = std::move(optimizer);
  result.updates_run = k;
  return result;
}

}  // namespace tgrpo
