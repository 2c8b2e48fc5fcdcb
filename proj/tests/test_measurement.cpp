#include <cmath>

#include <gtest/gtest.h>

#include "hmimo/channel_model.hpp"
#include "hmimo/measurement.hpp"
#include "hmimo/random.hpp"

using namespace hmimo;

namespace {

const UpaConfig kArray{8, 8, 0.25, 1.0};

ChannelRealization random_channel(std::uint64_t seed) {
  const auto set = build_index_set(kArray);
  return draw_channel(make_profile(set, std::vector<double>(set.size(), 1.0)), kArray, seed);
}

}  // namespace

TEST(Combiner, ShapeAndFactors) {
  const auto c = build_combiner(kArray, {20, 7});
  ASSERT_EQ(c.matrix.rows(), 20);
  ASSERT_EQ(c.matrix.cols(), 64);
  for (Eigen::Index r = 0; r < 20; ++r) EXPECT_NEAR(std::abs(c.feed_gains[r]), 1.0, 1e-15);
  EXPECT_LT((c.phases.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_GE(c.amplitudes.minCoeff(), 0.0);
  EXPECT_LT(c.amplitudes.maxCoeff(), 1.0);
}

TEST(Combiner, FactorizationIdentity) {
  const auto c = build_combiner(kArray, {20, 7});
  for (Eigen::Index r = 0; r < 20; ++r)
    for (Eigen::Index k = 0; k < 64; ++k)
      EXPECT_LT(std::abs(c.matrix(r, k) - c.feed_gains[r] * c.phases(r, k) * c.amplitudes[k]), 1e-12);
}

TEST(Combiner, UnitOverridesLeaveP) {
  CombinerConfig cc{12, 3};
  const auto base = build_combiner(kArray, cc);
  cc.unit_feed_gains = cc.unit_amplitudes = true;
  const auto c = build_combiner(kArray, cc);
  EXPECT_EQ(c.phases, base.phases);
  EXPECT_LT((c.matrix - c.phases).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Combiner, DiagonalFactorsScaleRowsAndColumns) {
  const auto c = build_combiner(kArray, {16, 21});
  Rng rng(5);
  // diag(A) P: each row is a unit-modulus multiple of the matching P row.
  const cmat ap = c.feed_gains.asDiagonal() * c.phases;
  for (int probe = 0; probe < 10; ++probe) {
    const auto r = static_cast<Eigen::Index>(rng.next_u64() % 16);
    const auto k1 = static_cast<Eigen::Index>(rng.next_u64() % 64), k2 = static_cast<Eigen::Index>(rng.next_u64() % 64);
    EXPECT_LT(std::abs(ap(r, k1) / c.phases(r, k1) - ap(r, k2) / c.phases(r, k2)), 1e-12);
  }
  // P diag(M): each column is a real nonnegative multiple of the matching P column.
  const cmat pm = c.phases * c.amplitudes.cast<cplx>().asDiagonal();
  for (int probe = 0; probe < 10; ++probe) {
    const auto k = static_cast<Eigen::Index>(rng.next_u64() % 64);
    const auto r1 = static_cast<Eigen::Index>(rng.next_u64() % 16), r2 = static_cast<Eigen::Index>(rng.next_u64() % 16);
    const cplx s1 = pm(r1, k) / c.phases(r1, k), s2 = pm(r2, k) / c.phases(r2, k);
    EXPECT_LT(std::abs(s1 - s2), 1e-12);
    EXPECT_NEAR(s1.imag(), 0.0, 1e-12);
    EXPECT_GE(s1.real(), 0.0);
  }
}

TEST(Combiner, Reproducible) {
  EXPECT_EQ(build_combiner(kArray, {16, 9}).matrix, build_combiner(kArray, {16, 9}).matrix);
  EXPECT_NE(build_combiner(kArray, {16, 9}).matrix, build_combiner(kArray, {16, 10}).matrix);
  EXPECT_THROW(build_combiner(kArray, {0, 1}), std::invalid_argument);
}

TEST(Observe, NoiselessIsExact) {
  const auto c = build_combiner(kArray, {16, 1});
  const auto h = random_channel(2);
  const auto obs = observe(c.matrix, h, kNoiseless, 3);
  EXPECT_EQ(obs.y, (c.matrix * h.spatial).eval());
  EXPECT_EQ(obs.noise_variance, 0.0);
  EXPECT_EQ(std::abs(obs.pilot_symbol), 1.0);
}

TEST(Observe, NoiseVarianceFollowsRealizedSignal) {
  const auto c = build_combiner(kArray, {16, 1});
  const auto h = random_channel(2);
  const double signal = (c.matrix * h.spatial).squaredNorm();
  for (double snr : {-5.0, 0.0, 10.0, 23.5}) {
    const auto obs = observe(c.matrix, h, snr, 3);
    EXPECT_NEAR(signal / obs.noise_variance / std::pow(10.0, snr / 10), 1.0, 1e-12);
    EXPECT_NEAR(obs.snr_linear, std::pow(10.0, snr / 10), 1e-12 * obs.snr_linear);
    const auto pf = observe(c.matrix, h, snr, 3, SnrConvention::per_feed);
    EXPECT_NEAR(pf.noise_variance * 16, obs.noise_variance, 1e-12 * obs.noise_variance);
  }
}

TEST(Observe, NoisePowerMatchesVariance) {
  const auto c = build_combiner(kArray, {16, 1});
  const auto h = random_channel(2);
  const cvec clean = c.matrix * h.spatial;
  double acc = 0.0, var = 0.0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const auto obs = observe(c.matrix, h, 5.0, 100 + d);
    acc += (obs.y - clean).squaredNorm() / 16;
    var = obs.noise_variance;
  }
  EXPECT_NEAR(acc / draws / var, 1.0, 0.03);
}

TEST(Observe, ZeroChannelRaisesFlag) {
  const auto c = build_combiner(kArray, {16, 1});
  ChannelRealization zero{cvec::Zero(64), cvec::Zero(45), 0};
  const auto obs = observe(c.matrix, zero, 10.0, 3);
  EXPECT_TRUE(obs.zero_signal);
  EXPECT_EQ(obs.noise_variance, 0.0);
  EXPECT_EQ(obs.y.squaredNorm(), 0.0);
}

TEST(Observe, DeterministicAndValidated) {
  const auto c = build_combiner(kArray, {16, 1});
  const auto h = random_channel(2);
  EXPECT_EQ(observe(c.matrix, h, 3.0, 8).y, observe(c.matrix, h, 3.0, 8).y);
  EXPECT_NE(observe(c.matrix, h, 3.0, 8).y, observe(c.matrix, h, 3.0, 9).y);
  EXPECT_THROW(observe(c.matrix, h, std::nan(""), 8), std::invalid_argument);
  EXPECT_THROW(observe(c.matrix, h, -INFINITY, 8), std::invalid_argument);
  EXPECT_THROW(observe(cmat::Zero(4, 10), h, 3.0, 8), std::invalid_argument);
}
