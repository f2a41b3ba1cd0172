#ifndef TGRPO_CONFIG_HPP_
#define TGRPO_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tgrpo/environment.hpp"
#include "tgrpo/reward.hpp"
#include "tgrpo/trainer.hpp"

namespace tgrpo {

inline constexpr int kConfigSchemaVersion = 1;

enum class SweepAxis { kNone, kAlphaStep, kGroupSize };

const char* sweep_axis_name(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> values;
  std::size_t repetitions = 1;

  bool operator==(const SweepSpec&) const = default;
};

// Everything one config file describes.
struct ExperimentConfig {
  TrainConfig train;
  TaskConfig task;
  RewardConfig reward;
  SweepSpec sweep;

  // Throws ConfigError naming the violated field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Line-oriented format:
//
//   schema_version = 1
//   [train]
//   group_size = 4
//   hidden = 64, 64
//   [task]
//   workspace_low = -0.5, -0.5, -0.5
//   [reward]
//   keyposes = expert            # or "x,y,z; x,y,z; ..."
//   [sweep]
//   axis = alpha_step            # none | alpha_step | group_size
//   values = 0.1, 0.3, 0.5
//
// '#' starts a comment. Unknown sections or keys, duplicate keys and a
// missing or mismatched schema_version are ConfigErrors. Omitted keys keep
// their defaults. Parsing does not call validate().
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text with every key written out; parse_config(serialize_config(c))
// == c for any parsed c.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a 64 of the canonical serialization.
std::uint64_t config_digest(const ExperimentConfig& config);
std::string digest_hex(std::uint64_t digest);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace tgrpo

#endif  // TGRPO_CONFIG_HPP_
