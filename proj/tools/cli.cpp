#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <mutex>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tgrpo/checkpoint.hpp"
#include "tgrpo/config.hpp"
#include "tgrpo/errors.hpp"
#include "tgrpo/trainer.hpp"

namespace tgrpo::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Loads, applies command-line overrides and validates. Returns nullopt after
// logging when the config is unusable.
std::optional<ExperimentConfig> resolve_config(const Options& options, std::ostream& log) {
  try {
    if (options.config.empty()) throw ConfigError("no --config file given");
    ExperimentConfig cfg = load_config(options.config);
    if (options.seed) cfg.train.seed = *options.seed;
    if (options.audit_gradients) cfg.train.audit_gradients = true;
    cfg.validate();
    return cfg;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

bool prepare_out_dir(const Options& options, std::ostream& log) {
  if (options.out.empty()) {
    log << "error: no --out directory given\n";
    return false;
  }
  std::error_code ec;
  std::filesystem::create_directories(options.out, ec);
  if (ec) {
    log << "error: cannot create " << options.out.string() << ": " << ec.message() << '\n';
    return false;
  }
  return true;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

nlohmann::json eval_json(const EvalResult& r) {
  return {{"episodes", r.episodes}, {"successes", r.successes},
          {"success_rate", r.success_rate}, {"mean_return", r.mean_return}};
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) row += ',';
    row += csv_field(fields[k]);
  }
  return row + "\r\n";
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (k > 0) out += ' ';
    out += std::to_string(seeds[k]);
  }
  return out;
}

// One training run of a sweep or ablation grid.
struct Cell {
  ExperimentConfig config;
  std::function<void(std::size_t, const TrajectoryGroup&, const AdvantageTensor&)> check;
  bool ok = false;
  std::string error;
  EvalResult final_eval;
  double wall_seconds = 0.0;
};

void run_cell(Cell& cell, bool parallel_eval) {
  const auto start = Clock::now();
  try {
    TrainHooks hooks;
    hooks.on_group = cell.check;
    hooks.parallel_eval = parallel_eval;
    const TrainResult r = train(cell.config.train, cell.config.task, cell.config.reward, hooks);
    cell.final_eval = r.final_eval;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.wall_seconds = seconds_since(start);
}

// Runs every cell; in parallel mode up to hardware_concurrency at a time.
// Each cell is deterministic on its own, so results do not depend on the
// schedule.
void run_cells(std::vector<Cell>& cells, bool serial, std::ostream& log) {
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      run_cell(cells[k], false);
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "cell " << k + 1 << "/" << cells.size() << ": "
          << (cells[k].ok ? "success " + format_double(cells[k].final_eval.success_rate)
                          : "failed: " + cells[k].error)
          << '\n';
    }
  };
  const std::size_t workers =
      serial ? 1
             : std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, cells.size());
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, worker));
  for (auto& job : jobs) job.get();
}

ExperimentConfig cell_config(const ExperimentConfig& base, std::size_t repetition) {
  ExperimentConfig cfg = base;
  cfg.sweep = SweepSpec{};
  cfg.train.seed = base.train.seed + repetition;
  return cfg;
}

void apply_sweep_value(ExperimentConfig& cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kAlphaStep:
      cfg.train.weights = {value, 1.0 - value};
      break;
    case SweepAxis::kGroupSize:
      cfg.train.group_size = static_cast<std::size_t>(value);
      break;
    case SweepAxis::kNone:
      break;
  }
}

struct Aggregate {
  std::size_t ok = 0;
  double success = 0.0;
  double mean_return = 0.0;
  std::string status;
};

Aggregate aggregate(const std::vector<Cell>& cells, std::size_t first, std::size_t count) {
  Aggregate a;
  for (std::size_t k = first; k < first + count; ++k) {
    if (!cells[k].ok) continue;
    ++a.ok;
    a.success += cells[k].final_eval.success_rate;
    a.mean_return += cells[k].final_eval.mean_return;
  }
  if (a.ok > 0) {
    a.success /= static_cast<double>(a.ok);
    a.mean_return /= static_cast<double>(a.ok);
  }
  a.status = a.ok == count ? "ok"
             : a.ok == 0   ? "failed"
                           : "partial " + std::to_string(a.ok) + "/" + std::to_string(count);
  return a;
}

// Throws ContractError unless every step column is standardized (mean 0,
// sample std 1, or all zeros) and the fused tensor is exactly the step part.
void assert_step_only(const TrajectoryGroup& g, const AdvantageTensor& adv) {
  if (adv.fused != adv.step) throw ContractError("step-only: fused != step advantages");
  for (std::size_t t = 0; t < g.length; ++t) {
    double mean = 0.0;
    bool all_zero = true;
    for (std::size_t i = 0; i < g.size; ++i) {
      mean += adv.fused_at(i, t);
      all_zero = all_zero && adv.fused_at(i, t) == 0.0;
    }
    if (all_zero) continue;
    mean /= static_cast<double>(g.size);
    double ss = 0.0;
    for (std::size_t i = 0; i < g.size; ++i) ss += std::pow(adv.fused_at(i, t) - mean, 2);
    const double sd = std::sqrt(ss / static_cast<double>(g.size - 1));
    if (std::abs(mean) > 1e-12 || std::abs(sd - 1.0) > 1e-9) {
      throw ContractError("step-only: column " + std::to_string(t) + " is not standardized");
    }
  }
}

void assert_trajectory_only(const TrajectoryGroup& g, const AdvantageTensor& adv) {
  for (std::size_t i = 0; i < g.size; ++i) {
    for (std::size_t t = 0; t < g.length; ++t) {
      if (adv.fused_at(i, t) != adv.trajectory[i]) {
        throw ContractError("trajectory-only: advantages of trajectory " + std::to_string(i) +
                            " vary across steps");
      }
    }
  }
}

int guarded(const char* command, std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << command << ": config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    log << command << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

int run_train(const Options& options, std::ostream& out, std::ostream& log) {
  const auto cfg = resolve_config(options, log);
  if (!cfg) return kExitBadConfig;
  if (!prepare_out_dir(options, log)) return kExitFailure;
  return guarded("train", log, [&] {
    const auto start = Clock::now();
    write_file(options.out / "config.cfg", serialize_config(*cfg));
    std::ofstream metrics(options.out / "metrics.jsonl", std::ios::binary);
    TrainHooks hooks;
    hooks.metrics = &metrics;
    hooks.parallel_eval = !options.serial;
    const TrainResult r = train(cfg->train, cfg->task, cfg->reward, hooks);
    metrics.close();
    const std::uint64_t digest = config_digest(*cfg);
    save_checkpoint(options.out / "checkpoint.bin", {r.policy, r.optimizer, digest});
    const nlohmann::json summary = {{"config_digest", digest_hex(digest)},
                                    {"seed", cfg->train.seed},
                                    {"updates_run", r.updates_run},
                                    {"reference_digest", digest_hex(r.reference_digest)},
                                    {"initial_eval", eval_json(r.initial_eval)},
                                    {"final_eval", eval_json(r.final_eval)},
                                    {"wall_seconds", seconds_since(start)}};
    write_file(options.out / "summary.json", summary.dump(2) + "\n");
    out << "final success " << format_double(r.final_eval.success_rate) << " over "
        << r.final_eval.episodes << " episodes (initial "
        << format_double(r.initial_eval.success_rate) << ")\n";
    return kExitOk;
  });
}

int run_eval(const Options& options, std::ostream& out, std::ostream& log) {
  const auto cfg = resolve_config(options, log);
  if (!cfg) return kExitBadConfig;
  return guarded("eval", log, [&] {
    if (options.checkpoint.empty()) throw ConfigError("no --checkpoint given");
    const Checkpoint ckp = load_checkpoint(options.checkpoint);
    if (ckp.policy.architecture().input_dim != kObservationDim ||
        ckp.policy.architecture().action_count != kActionCount) {
      throw FormatError("checkpoint policy does not match the PointManip observation/action sizes");
    }
    const std::size_t episodes = options.episodes.value_or(cfg->train.eval_episodes);
    const EvalResult r = evaluate(ckp.policy, cfg->task, cfg->reward, episodes,
                                  cfg->train.seed, !options.serial);
    nlohmann::json result = eval_json(r);
    result["checkpoint_config_digest"] = digest_hex(ckp.config_digest);
    result["config_digest"] = digest_hex(config_digest(*cfg));
    result["seed"] = cfg->train.seed;
    if (!options.out.empty()) {
      if (!prepare_out_dir(options, log)) return kExitFailure;
      write_file(options.out / "eval.json", result.dump(2) + "\n");
    }
    out << result.dump() << '\n';
    return kExitOk;
  });
}

int run_sweep(const Options& options, std::ostream& out, std::ostream& log) {
  const auto cfg = resolve_config(options, log);
  if (!cfg) return kExitBadConfig;
  if (cfg->sweep.axis == SweepAxis::kNone) {
    log << "error: sweep.axis must be alpha_step or group_size for the sweep command\n";
    return kExitBadConfig;
  }
  if (!prepare_out_dir(options, log)) return kExitFailure;
  return guarded("sweep", log, [&] {
    const SweepSpec& sweep = cfg->sweep;
    const std::size_t reps = sweep.repetitions;
    std::vector<Cell> cells;
    for (double value : sweep.values) {
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Cell cell;
        cell.config = cell_config(*cfg, rep);
        apply_sweep_value(cell.config, sweep.axis, value);
        cells.push_back(std::move(cell));
      }
    }
    run_cells(cells, options.serial, log);

    const std::string axis = sweep_axis_name(sweep.axis);
    std::string csv = csv_row({"kind", "axis", "value", "repetition", "seed", "config_digest",
                               "status", "final_success", "final_mean_return"});
    std::string timing = csv_row({"kind", "value", "repetition", "seed", "wall_seconds"});
    for (std::size_t v = 0; v < sweep.values.size(); ++v) {
      const std::string value = format_double(sweep.values[v]);
      std::vector<std::uint64_t> seeds;
      double wall = 0.0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Cell& c = cells[v * reps + rep];
        seeds.push_back(c.config.train.seed);
        wall += c.wall_seconds;
        const std::string seed = std::to_string(c.config.train.seed);
        csv += csv_row({"cell", axis, value, std::to_string(rep), seed,
                        digest_hex(config_digest(c.config)),
                        c.ok ? "ok" : "failed: " + c.error,
                        c.ok ? format_double(c.final_eval.success_rate) : "",
                        c.ok ? format_double(c.final_eval.mean_return) : ""});
        timing += csv_row({"cell", value, std::to_string(rep), seed, format_double(c.wall_seconds)});
      }
      const Aggregate a = aggregate(cells, v * reps, reps);
      csv += csv_row({"aggregate", axis, value, "all", join_seeds(seeds),
                      digest_hex(config_digest(cells[v * reps].config)), a.status,
                      a.ok ? format_double(a.success) : "", a.ok ? format_double(a.mean_return) : ""});
      timing += csv_row({"aggregate", value, "all", join_seeds(seeds), format_double(wall)});
      out << axis << " = " << value << ": mean final success "
          << (a.ok ? format_double(a.success) : std::string("n/a")) << " (" << a.status << ")\n";
    }
    write_file(options.out / "sweep.csv", csv);
    write_file(options.out / "sweep_timing.csv", timing);
    return std::all_of(cells.begin(), cells.end(), [](const Cell& c) { return c.ok; })
               ? kExitOk
               : kExitFailure;
  });
}

int run_ablation(const Options& options, std::ostream& out, std::ostream& log) {
  const auto cfg = resolve_config(options, log);
  if (!cfg) return kExitBadConfig;
  if (!prepare_out_dir(options, log)) return kExitFailure;
  return guarded("ablate", log, [&] {
    struct Variant {
      const char* name;
      FusionWeights weights;
      std::function<void(const TrajectoryGroup&, const AdvantageTensor&)> check;
    };
    const std::vector<Variant> variants{
        {"fused", cfg->train.weights, nullptr},
        {"step_only", {1.0, 0.0}, assert_step_only},
        {"trajectory_only", {0.0, 1.0}, assert_trajectory_only},
    };
    const std::size_t reps = cfg->sweep.repetitions;
    std::vector<Cell> cells;
    for (const Variant& variant : variants) {
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Cell cell;
        cell.config = cell_config(*cfg, rep);
        cell.config.train.weights = variant.weights;
        if (variant.check) {
          cell.check = [check = variant.check](std::size_t, const TrajectoryGroup& g,
                                               const AdvantageTensor& adv) { check(g, adv); };
        }
        cells.push_back(std::move(cell));
      }
    }
    run_cells(cells, options.serial, log);

    std::string csv = csv_row({"variant", "alpha_step", "alpha_traj", "seeds", "config_digest",
                               "status", "mean_final_success", "final_successes",
                               "mean_final_return"});
    std::string timing = csv_row({"variant", "repetition", "seed", "wall_seconds"});
    for (std::size_t v = 0; v < variants.size(); ++v) {
      std::vector<std::uint64_t> seeds;
      std::string per_rep;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Cell& c = cells[v * reps + rep];
        seeds.push_back(c.config.train.seed);
        if (rep > 0) per_rep += ' ';
        per_rep += c.ok ? format_double(c.final_eval.success_rate) : "failed";
        timing += csv_row({variants[v].name, std::to_string(rep),
                           std::to_string(c.config.train.seed), format_double(c.wall_seconds)});
      }
      const Aggregate a = aggregate(cells, v * reps, reps);
      std::string status = a.status;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        if (!cells[v * reps + rep].ok) status += "; " + cells[v * reps + rep].error;
      }
      csv += csv_row({variants[v].name, format_double(variants[v].weights.alpha_step),
                      format_double(variants[v].weights.alpha_traj), join_seeds(seeds),
                      digest_hex(config_digest(cells[v * reps].config)), status,
                      a.ok ? format_double(a.success) : "", per_rep,
                      a.ok ? format_double(a.mean_return) : ""});
      out << std::left << std::setw(16) << variants[v].name << " mean final success "
          << (a.ok ? format_double(a.success) : std::string("n/a")) << "  [" << per_rep << "]\n";
    }
    write_file(options.out / "ablation.csv", csv);
    write_file(options.out / "ablation_timing.csv", timing);
    return std::all_of(cells.begin(), cells.end(), [](const Cell& c) { return c.ok; })
               ? kExitOk
               : kExitFailure;
  });
}

}  // namespace tgrpo::cli
