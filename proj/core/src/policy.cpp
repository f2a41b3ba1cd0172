#include "tgrpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <utility>

#include "tgrpo/errors.hpp"

namespace tgrpo {
namespace {

void require_state_dim(const PolicyParams& params, std::span<const double> state) {
  if (state.size() != params.architecture().input_dim) {
    std::ostringstream msg;
    msg << "policy input has " << state.size() << " entries, architecture expects "
        << params.architecture().input_dim;
    throw ContractError(msg.str());
  }
}

void require_action(const PolicyParams& params, std::size_t action) {
  if (action >= params.architecture().action_count) {
    std::ostringstream msg;
    msg << "action " << action << " out of range [0, "
        << params.architecture().action_count << ")";
    throw ContractError(msg.str());
  }
}

// In-place log-softmax.
void log_softmax(std::vector<double>& logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max_logit);
  const double log_norm = max_logit + std::log(sum);
  for (double& v : logits) v -= log_norm;
}

// Forward pass keeping every layer's activation. activations[0] is the input,
// activations[L] the raw logits.
std::vector<std::vector<double>> forward_trace(const PolicyParams& params,
                                               std::span<const double> state) {
  const std::size_t layers = params.layer_count();
  std::vector<std::vector<double>> activations(layers + 1);
  activations[0].assign(state.begin(), state.end());
  const auto values = params.values();
  for (std::size_t l = 0; l < layers; ++l) {
    const LayerOffsets& off = params.offsets(l);
    const std::vector<double>& input = activations[l];
    std::vector<double>& output = activations[l + 1];
    output.resize(off.out);
    for (std::size_t r = 0; r < off.out; ++r) {
      const double* row = values.data() + off.weights + r * off.in;
      double z = values[off.bias + r];
      for (std::size_t c = 0; c < off.in; ++c) z += row[c] * input[c];
      output[r] = (l + 1 < layers) ? std::tanh(z) : z;
    }
  }
  return activations;
}

}  // namespace

std::vector<std::size_t> Architecture::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(action_count);
  return sizes;
}

std::size_t Architecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }
  return count;
}

void Architecture::validate() const {
  if (input_dim == 0) throw ConfigError("architecture: input dim must be > 0");
  if (hidden.empty()) throw ConfigError("architecture: hidden dims must be nonempty");
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (hidden[i] == 0) {
      throw ConfigError("architecture: hidden dim " + std::to_string(i) + " is zero");
    }
  }
  if (action_count < 2) throw ConfigError("architecture: action count must be >= 2");
}

PolicyParams::PolicyParams(Architecture architecture, std::vector<double> values)
    : architecture_(std::move(architecture)), values_(std::move(values)) {
  architecture_.validate();
  if (values_.size() != architecture_.parameter_count()) {
    std::ostringstream msg;
    msg << "parameter vector has " << values_.size() << " entries, architecture needs "
        << architecture_.parameter_count();
    throw ContractError(msg.str());
  }
  const auto sizes = architecture_.layer_sizes();
  std::size_t cursor = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    LayerOffsets off;
    off.in = sizes[l];
    off.out = sizes[l + 1];
    off.weights = cursor;
    cursor += off.in * off.out;
    off.bias = cursor;
    cursor += off.out;
    offsets_.push_back(off);
  }
}

LayerView PolicyParams::layer(std::size_t index) const {
  const LayerOffsets& off = offsets_.at(index);
  const std::span<const double> all = values_;
  return LayerView{off.in, off.out, all.subspan(off.weights, off.in * off.out),
                   all.subspan(off.bias, off.out)};
}

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::uint64_t parameter_digest(const PolicyParams& params) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= p[i];
      hash *= 0x100000001b3ULL;
    }
  };
  for (std::size_t size : params.architecture().layer_sizes()) {
    const std::uint64_t s = size;
    feed(&s, sizeof s);
  }
  const auto values = params.values();
  feed(values.data(), values.size_bytes());
  return hash;
}

std::uint64_t PolicySnapshot::digest() const { return parameter_digest(params_); }

double ActionDistribution::probability(std::size_t action) const {
  return std::exp(log_probs.at(action));
}

std::size_t ActionDistribution::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(log_probs.begin(), log_probs.end()) - log_probs.begin());
}

PolicyParams init_policy(const Architecture& architecture, std::uint64_t seed) {
  architecture.validate();
  std::vector<double> values(architecture.parameter_count(), 0.0);
  Rng rng(seed);
  const auto sizes = architecture.layer_sizes();
  std::size_t cursor = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l];
    const std::size_t fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t k = 0; k < fan_in * fan_out; ++k) {
      values[cursor++] = uniform(rng, -limit, limit);
    }
    cursor += fan_out;  // biases stay zero
  }
  return PolicyParams(architecture, std::move(values));
}

PolicyParams zero_policy(const Architecture& architecture) {
  architecture.validate();
  return PolicyParams(architecture,
                      std::vector<double>(architecture.parameter_count(), 0.0));
}

ActionDistribution forward(const PolicyParams& params, std::span<const double> state) {
  require_state_dim(params, state);
  auto activations = forward_trace(params, state);
  ActionDistribution dist{std::move(activations.back())};
  log_softmax(dist.log_probs);
  return dist;
}

SampledAction sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    const double p = std::exp(dist.log_probs[a]);
    if (p > 0.0) last_positive = a;
    cumulative += p;
    if (u < cumulative) return SampledAction{a, dist.log_probs[a]};
  }
  // Rounding left cumulative slightly below one.
  return SampledAction{last_positive, dist.log_probs[last_positive]};
}

double accumulate_logprob_grad(const PolicyParams& params,
                               std::span<const double> state, std::size_t action,
                               double weight, std::span<double> gradient) {
  require_state_dim(params, state);
  require_action(params, action);
  if (gradient.size() != params.size()) {
    throw ContractError("gradient buffer size does not match parameter count");
  }
  const auto activations = forward_trace(params, state);
  std::vector<double> log_probs = activations.back();
  log_softmax(log_probs);
  const double log_prob = log_probs[action];

  // d log pi(a) / d logits = onehot(a) - softmax
  std::vector<double> delta(log_probs.size());
  for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = -std::exp(log_probs[k]);
  delta[action] += 1.0;

  const auto values = params.values();
  for (std::size_t l = params.layer_count(); l-- > 0;) {
    const LayerOffsets& off = params.offsets(l);
    const std::vector<double>& input = activations[l];
    for (std::size_t r = 0; r < off.out; ++r) {
      const double d = weight * delta[r];
      double* grow = gradient.data() + off.weights + r * off.in;
      for (std::size_t c = 0; c < off.in; ++c) grow[c] += d * input[c];
      gradient[off.bias + r] += d;
    }
    if (l == 0) break;
    std::vector<double> previous(off.in, 0.0);
    for (std::size_t r = 0; r < off.out; ++r) {
      const double* row = values.data() + off.weights + r * off.in;
      const double d = delta[r];
      for (std::size_t c = 0; c < off.in; ++c) previous[c] += row[c] * d;
    }
    for (std::size_t c = 0; c < off.in; ++c) {
      previous[c] *= 1.0 - input[c] * input[c];  // tanh'
    }
    delta = std::move(previous);
  }
  return log_prob;
}

LogProbGrad logprob_and_grad(const PolicyParams& params, std::span<const double> state,
                             std::size_t action) {
  LogProbGrad out;
  out.gradient.assign(params.size(), 0.0);
  out.log_prob = accumulate_logprob_grad(params, state, action, 1.0, out.gradient);
  return out;
}

}  // namespace tgrpo
