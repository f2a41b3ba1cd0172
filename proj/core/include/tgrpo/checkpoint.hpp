#ifndef TGRPO_CHECKPOINT_HPP_
#define TGRPO_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tgrpo/optimizer.hpp"
#include "tgrpo/policy.hpp"

namespace tgrpo {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container, little-endian:
//   "TGRPOCKP" | u32 version | u64 config digest
//   u64 input_dim | u64 hidden count | u64 hidden[...] | u64 action_count
//   u64 parameter count | f64 params[...]
//   u8 has_optimizer
//   [ f64 lr, beta1, beta2, eps, weight_decay | u64 step | f64 m[...] | f64 v[...] ]
// Doubles are stored as raw IEEE-754 bits, so load(save(x)) is bit-exact.
struct Checkpoint {
  PolicyParams policy;
  std::optional<OptimizerState> optimizer;
  std::uint64_t config_digest = 0;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws FormatError on a bad magic, unsupported version or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tgrpo

#endif  // TGRPO_CHECKPOINT_HPP_
