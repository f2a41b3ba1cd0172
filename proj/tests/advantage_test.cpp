#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "tgrpo/advantage.hpp"
#include "tgrpo/errors.hpp"
#include "tgrpo/random.hpp"

namespace tgrpo {
namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

TEST(Advantage, StepColumnExample) {
  const RewardMatrix r(3, 1, {1.0, 2.0, 3.0});
  EXPECT_EQ(step_advantages(r), (std::vector<double>{-1.0, 0.0, 1.0}));
}

TEST(Advantage, DegenerateColumnIsZero) {
  const RewardMatrix r(4, 1, {5.0, 5.0, 5.0, 5.0});
  EXPECT_EQ(step_advantages(r), (std::vector<double>(4, 0.0)));
}

TEST(Advantage, TrajectoryExample) {
  const RewardMatrix r(3, 2, {4.0, 6.0, 15.0, 5.0, 10.0, 20.0});
  EXPECT_EQ(trajectory_advantages(r), (std::vector<double>{-1.0, 0.0, 1.0}));
}

TEST(Advantage, EqualTotalsAreZero) {
  const RewardMatrix r(3, 2, {1.0, 2.0, 2.0, 1.0, 0.0, 3.0});
  EXPECT_EQ(trajectory_advantages(r), (std::vector<double>(3, 0.0)));
}

TEST(Advantage, ScaleAndShiftInvariance) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(5 * 7);
    for (double& x : v) x = uniform(rng, -2.0, 2.0);
    std::vector<double> scaled = v;
    for (double& x : scaled) x = 3.5 * x;
    const auto a = trajectory_advantages(RewardMatrix(5, 7, v));
    const auto b = trajectory_advantages(RewardMatrix(5, 7, scaled));
    const auto sa = step_advantages(RewardMatrix(5, 7, v));
    const auto sb = step_advantages(RewardMatrix(5, 7, scaled));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_NEAR(sa[i], sb[i], 1e-12);
  }
}

TEST(Advantage, StandardizedMomentsAndOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 8));
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 16));
    std::vector<double> v(n * m);
    for (double& x : v) x = uniform(rng, -5.0, 5.0);
    const RewardMatrix r(n, m, v);
    const AdvantageTensor adv = compute_advantages(r, FusionWeights{});
    const oracle::Advantages expected = oracle::advantages(v, n, m, 0.3, 0.7);
    for (std::size_t k = 0; k < n * m; ++k) {
      ASSERT_NEAR(adv.step[k], expected.step[k], 1e-12);
      ASSERT_NEAR(adv.fused[k], expected.fused[k], 1e-12);
    }
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(adv.trajectory[i], expected.trajectory[i], 1e-12);
    EXPECT_NEAR(mean_of(adv.trajectory), 0.0, 1e-12);
    EXPECT_NEAR(sample_std(adv.trajectory), 1.0, 1e-9);
    for (std::size_t t = 0; t < m; ++t) {
      std::vector<double> column;
      for (std::size_t i = 0; i < n; ++i) column.push_back(adv.step[i * m + t]);
      EXPECT_NEAR(mean_of(column), 0.0, 1e-12);
      EXPECT_NEAR(sample_std(column), 1.0, 1e-9);
    }
  }
}

TEST(Advantage, NearlyTiedValuesStayCentered) {
  // Observed in training: a spread of ~2e-5 on rewards near 0.94.
  const std::vector<double> column{0.94375044197192759, 0.94375044197192759,
                                   0.94375044197192759, 0.94373263026776333};
  const std::vector<double> z = standardize(column);
  EXPECT_NEAR(mean_of(z), 0.0, 1e-12);
  EXPECT_NEAR(sample_std(z), 1.0, 1e-9);

  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 8));
    const double base = uniform(rng, -10.0, 10.0);
    const double spread = std::pow(10.0, uniform(rng, -9.0, -3.0));
    std::vector<double> v(n);
    for (double& x : v) x = base + spread * uniform(rng, -1.0, 1.0);
    const std::vector<double> out = standardize(v);
    if (std::all_of(out.begin(), out.end(), [](double x) { return x == 0.0; })) continue;
    ASSERT_NEAR(mean_of(out), 0.0, 1e-12);
    ASSERT_NEAR(sample_std(out), 1.0, 1e-9);
  }
}

TEST(Advantage, FusionExample) {
  const std::vector<double> step{1.0};
  const std::vector<double> traj{0.0};
  EXPECT_EQ(fuse(step, traj, 1, FusionWeights{0.3, 0.7})[0], 0.3);
}

TEST(Advantage, FusionOfEqualValues) {
  for (double x : {-2.5, 0.0, 0.75, 3.0}) {
    const std::vector<double> step{x};
    const std::vector<double> traj{x};
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
      EXPECT_NEAR(fuse(step, traj, 1, FusionWeights{a, 1.0 - a})[0], x, 1e-15);
    }
  }
}

TEST(Advantage, FusionBoundariesAreExact) {
  Rng rng(9);
  std::vector<double> v(4 * 6);
  for (double& x : v) x = uniform(rng, 0.0, 3.0);
  const RewardMatrix r(4, 6, v);
  const AdvantageTensor step_only = compute_advantages(r, FusionWeights{1.0, 0.0});
  EXPECT_EQ(step_only.fused, step_only.step);
  const AdvantageTensor traj_only = compute_advantages(r, FusionWeights{0.0, 1.0});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(traj_only.fused_at(i, t), traj_only.trajectory[i]);
  }
}

TEST(Advantage, FusionIsLinear) {
  const std::vector<double> s{0.5, -1.0, 2.0, 0.25};
  const std::vector<double> t{1.5, -0.5};
  const auto fused = fuse(s, t, 2, FusionWeights{0.4, 0.6});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_DOUBLE_EQ(fused[i * 2 + c], 0.4 * s[i * 2 + c] + 0.6 * t[i]);
    }
  }
}

TEST(Advantage, BadWeightsAreConfigError) {
  EXPECT_THROW(FusionWeights({0.3, 0.6}).validate(), ConfigError);
  EXPECT_THROW(FusionWeights({-0.1, 1.1}).validate(), ConfigError);
  const std::vector<double> one{1.0};
  EXPECT_THROW(fuse(one, one, 1, FusionWeights{0.5, 0.6}), ConfigError);
}

TEST(Advantage, NonFiniteOrMisshapenInputIsContractError) {
  EXPECT_THROW(RewardMatrix(2, 1, {1.0, std::numeric_limits<double>::quiet_NaN()}),
               ContractError);
  EXPECT_THROW(RewardMatrix(2, 2, {1.0, 2.0, 3.0}), ContractError);
  EXPECT_THROW(RewardMatrix(1, 2, {1.0, 2.0}), ContractError);
  const std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(standardize(bad), ContractError);
}

}  // namespace
}  // namespace tgrpo
