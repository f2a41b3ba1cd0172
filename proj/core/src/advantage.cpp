#include "tgrpo/advantage.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "tgrpo/errors.hpp"

namespace tgrpo {

RewardMatrix::RewardMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ < 2) throw ContractError("reward matrix needs >= 2 trajectories");
  if (cols_ < 1) throw ContractError("reward matrix needs >= 1 step");
  if (values_.size() != rows_ * cols_) {
    throw ContractError("reward matrix: value count does not match rows * cols");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream msg;
      msg << "reward matrix: non-finite reward at (" << k / cols_ << ", " << k % cols_
          << ")";
      throw ContractError(msg.str());
    }
  }
}

std::vector<double> RewardMatrix::totals() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t t = 0; t < cols_; ++t) out[i] += (*this)(i, t);
  }
  return out;
}

void FusionWeights::validate() const {
  if (!(alpha_step >= 0.0) || !(alpha_traj >= 0.0)) {
    throw ConfigError("alpha_step and alpha_traj must both be >= 0");
  }
  if (!(std::abs(alpha_step + alpha_traj - 1.0) <= kWeightSumTolerance)) {
    std::ostringstream msg;
    msg << "alpha_step + alpha_traj must equal 1 (got " << alpha_step << " + "
        << alpha_traj << " = " << alpha_step + alpha_traj << ")";
    throw ConfigError(msg.str());
  }
}

std::vector<double> standardize(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractError("standardize: non-finite input");
  }
  if (n < 2) return out;
  // Work on offsets from the first sample. For nearly tied values the
  // subtraction is exact, so the mean's rounding error stays tiny relative to
  // the spread instead of relative to the magnitude of the rewards.
  const double shift = values[0];
  std::vector<double> offsets(n);
  for (std::size_t i = 0; i < n; ++i) offsets[i] = values[i] - shift;
  double mean = 0.0;
  for (double d : offsets) mean += d;
  mean /= static_cast<double>(n);
  double sum_sq = 0.0;
  for (double d : offsets) sum_sq += (d - mean) * (d - mean);
  const double sd = std::sqrt(sum_sq / static_cast<double>(n - 1));
  if (!(sd >= kDegenerateStd)) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (offsets[i] - mean) / sd;
  return out;
}

std::vector<double> step_advantages(const RewardMatrix& rewards) {
  const std::size_t n = rewards.rows();
  const std::size_t m = rewards.cols();
  std::vector<double> out(n * m, 0.0);
  std::vector<double> column(n);
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t i = 0; i < n; ++i) column[i] = rewards(i, t);
    const std::vector<double> z = standardize(column);
    for (std::size_t i = 0; i < n; ++i) out[i * m + t] = z[i];
  }
  return out;
}

std::vector<double> trajectory_advantages(const RewardMatrix& rewards) {
  return standardize(rewards.totals());
}

std::vector<double> fuse(std::span<const double> step_adv,
                         std::span<const double> traj_adv, std::size_t cols,
                         const FusionWeights& weights) {
  weights.validate();
  if (step_adv.size() != traj_adv.size() * cols) {
    throw ContractError("fuse: step advantages do not match rows x cols");
  }
  std::vector<double> out(step_adv.size());
  for (std::size_t i = 0; i < traj_adv.size(); ++i) {
    for (std::size_t t = 0; t < cols; ++t) {
      out[i * cols + t] =
          weights.alpha_step * step_adv[i * cols + t] + weights.alpha_traj * traj_adv[i];
    }
  }
  return out;
}

AdvantageTensor compute_advantages(const RewardMatrix& rewards,
                                   const FusionWeights& weights) {
  AdvantageTensor adv;
  adv.rows = rewards.rows();
  adv.cols = rewards.cols();
  adv.weights = weights;
  adv.step = step_advantages(rewards);
  adv.trajectory = trajectory_advantages(rewards);
  adv.fused = fuse(adv.step, adv.trajectory, adv.cols, weights);
  return adv;
}

}  // namespace tgrpo
