#ifndef TGRPO_POLICY_HPP_
#define TGRPO_POLICY_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tgrpo/random.hpp"

namespace tgrpo {

// Shape of a tanh MLP with a categorical (log-softmax) output head.
struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t action_count = 0;

  // [input_dim, hidden..., action_count]
  std::vector<std::size_t> layer_sizes() const;
  std::size_t layer_count() const { return hidden.size() + 1; }
  std::size_t parameter_count() const;

  // Throws ConfigError on zero dims, empty hidden list or < 2 actions.
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

// Read-only view of one dense layer inside the flat parameter vector.
// Weights are row-major [out x in].
struct LayerView {
  std::size_t in = 0;
  std::size_t out = 0;
  std::span<const double> weights;
  std::span<const double> bias;
};

// Offsets of one layer inside the flat parameter vector.
struct LayerOffsets {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weights = 0;
  std::size_t bias = 0;
};

// Policy parameters. The architecture is fixed at construction; only the
// values may change, and only through mutable_values().
class PolicyParams {
 public:
  PolicyParams(Architecture architecture, std::vector<double> values);

  const Architecture& architecture() const { return architecture_; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  std::size_t size() const { return values_.size(); }

  std::size_t layer_count() const { return offsets_.size(); }
  const LayerOffsets& offsets(std::size_t layer) const { return offsets_[layer]; }
  LayerView layer(std::size_t index) const;

  bool all_finite() const;

  bool operator==(const PolicyParams& other) const {
    return architecture_ == other.architecture_ && values_ == other.values_;
  }

 private:
  Architecture architecture_;
  std::vector<LayerOffsets> offsets_;
  std::vector<double> values_;
};

enum class SnapshotTag { kOld, kReference };

// Frozen deep copy of a parameter set, used as the sampling-time policy or
// the KL anchor.
class PolicySnapshot {
 public:
  PolicySnapshot(const PolicyParams& params, SnapshotTag tag)
      : params_(params), tag_(tag) {}

  const PolicyParams& params() const { return params_; }
  SnapshotTag tag() const { return tag_; }
  std::uint64_t digest() const;

 private:
  PolicyParams params_;
  SnapshotTag tag_;
};

// FNV-1a over the architecture and the raw bytes of every parameter.
std::uint64_t parameter_digest(const PolicyParams& params);

// Normalized log-probabilities over the discrete action set.
struct ActionDistribution {
  std::vector<double> log_probs;

  std::size_t size() const { return log_probs.size(); }
  double probability(std::size_t action) const;
  std::size_t argmax() const;
};

struct SampledAction {
  std::size_t action = 0;
  double log_prob = 0.0;
};

struct LogProbGrad {
  double log_prob = 0.0;
  std::vector<double> gradient;
};

// Glorot-uniform weights, zero biases. Deterministic in `seed`.
PolicyParams init_policy(const Architecture& architecture, std::uint64_t seed);

PolicyParams zero_policy(const Architecture& architecture);

ActionDistribution forward(const PolicyParams& params,
                           std::span<const double> state);

// Inverse-CDF sampling from one uniform draw.
SampledAction sample_action(const ActionDistribution& dist, Rng& rng);

LogProbGrad logprob_and_grad(const PolicyParams& params,
                             std::span<const double> state,
                             std::size_t action);

// Adds weight * d log pi(action | state) / d params into `gradient` and
// returns log pi(action | state). Hot path for the objective gradient.
double accumulate_logprob_grad(const PolicyParams& params,
                               std::span<const double> state,
                               std::size_t action, double weight,
                               std::span<double> gradient);

}  // namespace tgrpo

#endif  // TGRPO_POLICY_HPP_
