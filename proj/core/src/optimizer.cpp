#include "tgrpo/optimizer.hpp"

#include <cmath>

#include "tgrpo/errors.hpp"

namespace tgrpo {

void AdamWConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

OptimizerState OptimizerState::for_parameters(std::size_t count,
                                              const AdamWConfig& config) {
  config.validate();
  OptimizerState state;
  state.config = config;
  state.first_moment.assign(count, 0.0);
  state.second_moment.assign(count, 0.0);
  return state;
}

void adamw_step(std::span<double> params, std::span<const double> gradient,
                OptimizerState& state) {
  if (params.size() != gradient.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ContractError("adamw_step: parameter, gradient and moment sizes differ");
  }
  const AdamWConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = gradient[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params[k] -= c.learning_rate * (m_hat / (std::sqrt(v_hat) + c.epsilon) +
                                    c.weight_decay * params[k]);
  }
}

}  // namespace tgrpo
