#ifndef TGRPO_OBJECTIVE_HPP_
#define TGRPO_OBJECTIVE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "tgrpo/policy.hpp"

namespace tgrpo {

// Log-ratio exponents are clamped to +-kMaxLogRatio (with a warning).
inline constexpr double kMaxLogRatio = 30.0;

// Per-cell inputs of the clipped, KL-penalized group objective. All tensors
// are rows x cols, row-major (row = trajectory, col = timestep).
struct LossBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> logp_current;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
  std::vector<double> advantages;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;

  // Throws ContractError on shape mismatch, epsilon outside (0, 1) or beta < 0.
  void validate() const;
};

// pi_new / pi_old = exp(logp_new - logp_old).
double importance_ratio(double logp_new, double logp_old);

// r - ln r - 1 with r = pi_ref / pi_cur. Nonnegative; zero iff equal.
double kl_unbiased(double logp_ref, double logp_cur);

// min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv)
double clipped_term(double ratio, double advantage, double clip_epsilon);

// True when the clipped branch is strictly selected, i.e. the cell carries no
// gradient through the ratio.
bool clip_active(double ratio, double advantage, double clip_epsilon);

// Mean over trajectories of the per-trajectory mean over steps of
// clipped_term - beta * kl. Loss = -objective.
double tgrpo_objective(const LossBatch& batch);

// Summary statistics reported alongside the objective.
struct ObjectiveStats {
  double objective = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double mean_abs_advantage = 0.0;
};

ObjectiveStats objective_stats(const LossBatch& batch);

// d objective / d logp_current for every cell (same layout as the batch).
std::vector<double> objective_logp_sensitivities(const LossBatch& batch);

// Gradient of the loss (-objective) w.r.t. the policy parameters. `states`
// is rows * cols observation vectors laid out contiguously (input_dim each);
// old and reference log-probs are constants. batch.logp_current must be the
// log-probs of `params` on (states, actions).
std::vector<double> tgrpo_gradient(const LossBatch& batch, const PolicyParams& params,
                                   std::span<const double> states,
                                   std::span<const std::size_t> actions);

// Recomputes batch.logp_current from `params`.
void refresh_current_logp(LossBatch& batch, const PolicyParams& params,
                          std::span<const double> states,
                          std::span<const std::size_t> actions);

}  // namespace tgrpo

#endif  // TGRPO_OBJECTIVE_HPP_
