#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  namespace cli = tgrpo::cli;
  CLI::App app{"TGRPO training and evaluation on the PointManip task"};
  app.require_subcommand(1);

  cli::Options opts;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config, "Experiment config file")->required();
    sub->add_option("-s,--seed", seed, "Override train.seed");
    sub->add_flag("--serial", opts.serial, "Run evaluation and sweep cells one at a time");
  };

  CLI::App* train = app.add_subcommand("train", "Train a policy and write its artifacts");
  add_common(train);
  train->add_option("-o,--out", opts.out, "Output directory")->required();
  train->add_flag("--audit-gradients", opts.audit_gradients,
                  "Check every update's gradient against finite differences (slow)");

  CLI::App* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  add_common(eval);
  eval->add_option("-k,--checkpoint", opts.checkpoint, "checkpoint.bin from a train run")
      ->required();
  eval->add_option("-n,--episodes", episodes, "Episodes (default: train.eval_episodes)");
  eval->add_option("-o,--out", opts.out, "Optional directory for eval.json");

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep alpha_step or group_size");
  add_common(sweep);
  sweep->add_option("-o,--out", opts.out, "Output directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Fused vs step-only vs trajectory-only");
  add_common(ablate);
  ablate->add_option("-o,--out", opts.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : {train, eval, sweep, ablate}) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }
  if (eval->count("--episodes") > 0) opts.episodes = episodes;

  if (train->parsed()) return cli::run_train(opts, std::cout, std::cerr);
  if (eval->parsed()) return cli::run_eval(opts, std::cout, std::cerr);
  if (sweep->parsed()) return cli::run_sweep(opts, std::cout, std::cerr);
  return cli::run_ablation(opts, std::cout, std::cerr);
}
