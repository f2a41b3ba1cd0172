#ifndef TGRPO_OPTIMIZER_HPP_
#define TGRPO_OPTIMIZER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tgrpo {

struct AdamWConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  void validate() const;
  bool operator==(const AdamWConfig&) const = default;
};

// Moment accumulators for decoupled-weight-decay Adam.
struct OptimizerState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  static OptimizerState for_parameters(std::size_t count, const AdamWConfig& config);
  bool operator==(const OptimizerState&) const = default;
};

// One AdamW step minimizing the loss whose gradient is `gradient`.
void adamw_step(std::span<double> params, std::span<const double> gradient,
                OptimizerState& state);

}  // namespace tgrpo

#endif  // TGRPO_OPTIMIZER_HPP_
