#include "tgrpo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgrpo/diagnostics.hpp"
#include "tgrpo/errors.hpp"

namespace tgrpo {
namespace {

double clamp_log_ratio(double diff, const char* what) {
  if (std::isnan(diff)) throw NumericalError(std::string(what) + ": NaN log-ratio");
  if (diff > kMaxLogRatio || diff < -kMaxLogRatio) {
    std::ostringstream msg;
    msg << what << ": log-ratio " << diff << " clamped to +-" << kMaxLogRatio;
    diag::warn(msg.str());
    return std::clamp(diff, -kMaxLogRatio, kMaxLogRatio);
  }
  return diff;
}

bool clamped(double diff) { return diff > kMaxLogRatio || diff < -kMaxLogRatio; }

// exp(d) - d - 1, accurate near d = 0.
double exp_minus_linear(double d) {
  if (std::abs(d) < 1e-3) {
    return d * d * (0.5 + d * (1.0 / 6.0 + d * (1.0 / 24.0 + d / 120.0)));
  }
  return std::expm1(d) - d;
}

void require_finite(double v, std::size_t i, std::size_t t, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at (" << i << ", " << t << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

void LossBatch::validate() const {
  const std::size_t cells = rows * cols;
  if (rows == 0 || cols == 0) throw ContractError("loss batch is empty");
  if (logp_current.size() != cells || logp_old.size() != cells ||
      logp_ref.size() != cells || advantages.size() != cells) {
    throw ContractError("loss batch tensors must all have rows x cols entries");
  }
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ContractError("clip epsilon must lie in (0, 1)");
  }
  if (!(kl_beta >= 0.0)) throw ContractError("kl beta must be >= 0");
}

double importance_ratio(double logp_new, double logp_old) {
  return std::exp(clamp_log_ratio(logp_new - logp_old, "importance_ratio"));
}

double kl_unbiased(double logp_ref, double logp_cur) {
  return exp_minus_linear(clamp_log_ratio(logp_ref - logp_cur, "kl_unbiased"));
}

double clipped_term(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

bool clip_active(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return clipped * advantage < ratio * advantage;
}

ObjectiveStats objective_stats(const LossBatch& batch) {
  batch.validate();
  ObjectiveStats stats;
  std::size_t clipped_cells = 0;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    double row_sum = 0.0;
    for (std::size_t t = 0; t < batch.cols; ++t) {
      const std::size_t k = i * batch.cols + t;
      const double ratio = importance_ratio(batch.logp_current[k], batch.logp_old[k]);
      const double adv = batch.advantages[k];
      const double kl = kl_unbiased(batch.logp_ref[k], batch.logp_current[k]);
      const double cell = clipped_term(ratio, adv, batch.clip_epsilon) - batch.kl_beta * kl;
      require_finite(cell, i, t, "objective term");
      row_sum += cell;
      stats.mean_kl += kl;
      stats.mean_abs_advantage += std::abs(adv);
      if (clip_active(ratio, adv, batch.clip_epsilon)) ++clipped_cells;
    }
    stats.objective += row_sum / static_cast<double>(batch.cols);
  }
  const auto cells = static_cast<double>(batch.rows * batch.cols);
  stats.objective /= static_cast<double>(batch.rows);
  stats.mean_kl /= cells;
  stats.mean_abs_advantage /= cells;
  stats.clip_fraction = static_cast<double>(clipped_cells) / cells;
  return stats;
}

double tgrpo_objective(const LossBatch& batch) { return objective_stats(batch).objective; }

std::vector<double> objective_logp_sensitivities(const LossBatch& batch) {
  batch.validate();
  const double cell_weight = 1.0 / static_cast<double>(batch.rows * batch.cols);
  std::vector<double> out(batch.rows * batch.cols, 0.0);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    for (std::size_t t = 0; t < batch.cols; ++t) {
      const std::size_t k = i * batch.cols + t;
      const double ratio_diff = batch.logp_current[k] - batch.logp_old[k];
      const double kl_diff = batch.logp_ref[k] - batch.logp_current[k];
      double d = 0.0;
      if (!clamped(ratio_diff)) {
        const double ratio = std::exp(ratio_diff);
        const double adv = batch.advantages[k];
        // d ratio / d logp = ratio; the clip branch is flat in ratio.
        if (!clip_active(ratio, adv, batch.clip_epsilon)) d += adv * ratio;
      }
      if (!clamped(kl_diff)) {
        // kl = exp(u) - u - 1 with u = ref - cur, so d kl / d cur = -expm1(u).
        d += batch.kl_beta * std::expm1(kl_diff);
      }
      require_finite(d, i, t, "objective sensitivity");
      out[k] = d * cell_weight;
    }
  }
  return out;
}

std::vector<double> tgrpo_gradient(const LossBatch& batch, const PolicyParams& params,
                                   std::span<const double> states,
                                   std::span<const std::size_t> actions) {
  const std::size_t cells = batch.rows * batch.cols;
  const std::size_t dim = params.architecture().input_dim;
  if (actions.size() != cells || states.size() != cells * dim) {
    throw ContractError("tgrpo_gradient: states/actions do not match the batch shape");
  }
  const std::vector<double> sens = objective_logp_sensitivities(batch);
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t k = 0; k < cells; ++k) {
    if (sens[k] == 0.0) continue;
    // Loss = -objective.
    accumulate_logprob_grad(params, states.subspan(k * dim, dim), actions[k], -sens[k],
                            grad);
  }
  for (std::size_t p = 0; p < grad.size(); ++p) {
    if (!std::isfinite(grad[p])) {
      throw NumericalError("non-finite gradient at parameter " + std::to_string(p));
    }
  }
  return grad;
}

void refresh_current_logp(LossBatch& batch, const PolicyParams& params,
                          std::span<const double> states,
                          std::span<const std::size_t> actions) {
  const std::size_t cells = batch.rows * batch.cols;
  const std::size_t dim = params.architecture().input_dim;
  if (actions.size() != cells || states.size() != cells * dim) {
    throw ContractError("refresh_current_logp: states/actions do not match the batch");
  }
  batch.logp_current.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    batch.logp_current[k] = forward(params, states.subspan(k * dim, dim)).log_probs[actions[k]];
  }
}

}  // namespace tgrpo
