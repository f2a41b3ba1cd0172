#ifndef TGRPO_TOOLS_CLI_HPP_
#define TGRPO_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace tgrpo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadConfig = 2;

struct Options {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  // Run sweep cells and evaluation episodes one at a time.
  bool serial = false;
  bool audit_gradients = false;
  // eval only
  std::filesystem::path checkpoint;
  std::optional<std::size_t> episodes;
};

// RFC 4180 field: quoted when it holds a comma, quote or line break, with
// inner quotes doubled.
std::string csv_field(const std::string& text);

// Each command validates the config before touching the output directory, so
// a bad or missing config leaves no artifacts behind. Progress and errors go
// to `log`; results go to files under options.out and a short summary to
// `out`.

// Writes checkpoint.bin, metrics.jsonl, config.cfg and summary.json.
int run_train(const Options& options, std::ostream& out, std::ostream& log);

// Greedy evaluation of a checkpoint on the config's task; writes eval.json.
int run_eval(const Options& options, std::ostream& out, std::ostream& log);

// One training run per (sweep value, repetition). Writes sweep.csv (one row
// per cell plus one aggregate row per value) and sweep_timing.csv.
int run_sweep(const Options& options, std::ostream& out, std::ostream& log);

// Fused, step-only and trajectory-only variants with identical seeds. Writes
// ablation.csv (one row per variant) and ablation_timing.csv.
int run_ablation(const Options& options, std::ostream& out, std::ostream& log);

}  // namespace tgrpo::cli

#endif  // TGRPO_TOOLS_CLI_HPP_
