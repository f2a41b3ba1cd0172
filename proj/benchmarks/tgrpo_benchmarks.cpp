#include <benchmark/benchmark.h>

#include <vector>

#include "tgrpo/advantage.hpp"
#include "tgrpo/environment.hpp"
#include "tgrpo/objective.hpp"
#include "tgrpo/policy.hpp"
#include "tgrpo/trainer.hpp"

namespace {

using namespace tgrpo;

const TrainConfig& default_train() {
  static const TrainConfig config;
  return config;
}

void BM_Forward(benchmark::State& state) {
  const PolicyParams params = init_policy(policy_architecture(default_train()), 1);
  const std::vector<double> obs = observe(TaskConfig{}, spawn(TaskConfig{}, 1));
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, obs));
}
BENCHMARK(BM_Forward);

void BM_LogProbGrad(benchmark::State& state) {
  const PolicyParams params = init_policy(policy_architecture(default_train()), 1);
  const std::vector<double> obs = observe(TaskConfig{}, spawn(TaskConfig{}, 1));
  std::vector<double> grad(params.size(), 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate_logprob_grad(params, obs, 3, 0.5, grad));
  }
}
BENCHMARK(BM_LogProbGrad);

void BM_Advantages(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 80;
  Rng rng(3);
  std::vector<double> values(n * m);
  for (double& v : values) v = uniform(rng, 0.0, 6.0);
  const RewardMatrix rewards(n, m, values);
  for (auto _ : state) benchmark::DoNotOptimize(compute_advantages(rewards, FusionWeights{}));
}
BENCHMARK(BM_Advantages)->Arg(4)->Arg(8)->Arg(64);

TrajectoryGroup sample_default_group(const PolicyParams& params) {
  const TaskConfig task;
  GroupEnv env = GroupEnv::reset_group(task, 5, default_train().group_size);
  const RewardSpec spec = bind_reward(RewardConfig{}, task, env.initial_state());
  Rng rng(5);
  return sample_group(StochasticPolicy(params), env, spec, task.max_steps, rng);
}

void BM_SampleGroup(benchmark::State& state) {
  const PolicyParams params = init_policy(policy_architecture(default_train()), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_default_group(params));
}
BENCHMARK(BM_SampleGroup);

void BM_UpdateStep(benchmark::State& state) {
  const TrainConfig& config = default_train();
  const PolicyParams start = init_policy(policy_architecture(config), 1);
  const TrajectoryGroup group = sample_default_group(start);
  const PolicySnapshot old(start, SnapshotTag::kOld);
  for (auto _ : state) {
    PolicyParams params = start;
    OptimizerState opt = OptimizerState::for_parameters(params.size(), config.optimizer);
    benchmark::DoNotOptimize(update_step(group, params, old, old, config, opt));
  }
  state.counters["cells"] = static_cast<double>(group.size * group.length);
}
BENCHMARK(BM_UpdateStep);

void BM_Evaluate(benchmark::State& state) {
  const PolicyParams params = init_policy(policy_architecture(default_train()), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(params, TaskConfig{}, RewardConfig{}, 100, 0));
  }
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
