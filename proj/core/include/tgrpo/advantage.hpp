#ifndef TGRPO_ADVANTAGE_HPP_
#define TGRPO_ADVANTAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace tgrpo {

// Columns whose sample standard deviation falls below this are treated as
// uninformative and standardize to zero.
inline constexpr double kDegenerateStd = 1e-12;

// Tolerance on alpha_step + alpha_traj == 1.
inline constexpr double kWeightSumTolerance = 1e-12;

// N x M row-major matrix of per-step rewards: row i is trajectory i.
class RewardMatrix {
 public:
  // Throws ContractError unless rows >= 2, cols >= 1, values.size() ==
  // rows * cols and every entry is finite.
  RewardMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t t) const { return values_[i * cols_ + t]; }
  std::span<const double> values() const { return values_; }
  std::vector<double> totals() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

// Advantage weights; alpha_step + alpha_traj must equal one.
struct FusionWeights {
  double alpha_step = 0.3;
  double alpha_traj = 0.7;

  // Throws ConfigError on negative weights or a sum off by more than
  // kWeightSumTolerance.
  void validate() const;
};

struct AdvantageTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> step;        // rows x cols
  std::vector<double> trajectory;  // rows
  std::vector<double> fused;       // rows x cols
  FusionWeights weights;

  double fused_at(std::size_t i, std::size_t t) const { return fused[i * cols + t]; }
};

// (x - mean) / sample_std with divisor n - 1; zeros for a degenerate sample.
std::vector<double> standardize(std::span<const double> values);

// Per-timestep standardization across the group.
std::vector<double> step_advantages(const RewardMatrix& rewards);

// Standardization of per-trajectory totals across the group.
std::vector<double> trajectory_advantages(const RewardMatrix& rewards);

// alpha_step * step[i,t] + alpha_traj * traj[i].
std::vector<double> fuse(std::span<const double> step_adv,
                         std::span<const double> traj_adv, std::size_t cols,
                         const FusionWeights& weights);

AdvantageTensor compute_advantages(const RewardMatrix& rewards,
                                   const FusionWeights& weights);

}  // namespace tgrpo

#endif  // TGRPO_ADVANTAGE_HPP_
