#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anukf/errors.hpp"
#include "anukf/metrics.hpp"
#include "anukf/strapdown.hpp"
#include "support.hpp"

using namespace anukf;
using namespace anukf::metrics;
using anukf::testing::Engine;

namespace {

Series constant_norm_series(int n, double norm) {
  Series s;
  for (int j = 0; j < n; ++j) s.push_back(Eigen::Vector3d(0.0, norm, 0.0));
  return s;
}

}  // namespace

TEST(Vrmse, Examples) {
  EXPECT_EQ(vrmse({constant_norm_series(5, 0.0)}).value, 0.0);
  EXPECT_NEAR(vrmse({constant_norm_series(7, 0.1), constant_norm_series(7, 0.1)}).value, 0.1, 1e-15);
  const Series s{Eigen::Vector3d(3.0, 0.0, 0.0), Eigen::Vector3d(0.0, 0.0, 4.0)};
  EXPECT_NEAR(vrmse({s}).value, std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(vrmse({s}).value, 3.5355339059327378, 1e-12);
}

TEST(Vrmse, HandComputedMultiRun) {
  // Runs {(1,2,2), (0,0,0)} and {(2,0,0), (0,3,4)}: squared norms 9, 0, 4, 25.
  const Series a{Eigen::Vector3d(1, 2, 2), Eigen::Vector3d::Zero()};
  const Series b{Eigen::Vector3d(2, 0, 0), Eigen::Vector3d(0, 3, 4)};
  EXPECT_NEAR(vrmse({a, b}).value, std::sqrt(38.0 / 4.0), 1e-12);
  EXPECT_NEAR(mrmse({a, b}).value, std::sqrt(38.0 / 4.0), 1e-12);
}

TEST(Vrmse, MismatchedLengthsRejected) {
  EXPECT_THROW(rms_of_norms({constant_norm_series(3, 1.0), constant_norm_series(4, 1.0)}), InvalidInput);
  EXPECT_THROW(rms_of_norms({}), InvalidInput);
}

TEST(VrmseProperty, PermutationInvariant) {
  Engine rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = anukf::testing::uniform_int(rng, 1, 8);
    const int n = anukf::testing::uniform_int(rng, 1, 300);
    std::vector<Series> runs(static_cast<std::size_t>(m));
    for (auto& r : runs) {
      for (int j = 0; j < n; ++j) r.push_back(anukf::testing::gaussian_vector(rng, 3, 0.1));
    }
    const double base = vrmse(runs).value;
    std::vector<Series> shuffled = runs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto& r : shuffled) std::shuffle(r.begin(), r.end(), rng);
    EXPECT_NEAR(vrmse(shuffled).value, base, 1e-14 * base);
  }
}

TEST(PairwiseSum, MatchesCompensatedSum) {
  Engine rng(2);
  std::vector<double> v;
  for (int i = 0; i < 10007; ++i) v.push_back(anukf::testing::log_uniform(rng, 1e-8, 1e3));
  EXPECT_NEAR(pairwise_sum(v), anukf::testing::compensated_sum(v), 1e-12 * anukf::testing::compensated_sum(v));
  EXPECT_EQ(pairwise_sum({}), 0.0);
}

TEST(TrackAverage, Examples) {
  EXPECT_EQ(track_average(0.0, 0.0), 0.0);
  EXPECT_NEAR(track_average(3.0, 4.0), 3.5355339059327378, 1e-12);
}

TEST(TrackAverageProperty, IdempotentOnEqualInputs) {
  Engine rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = anukf::testing::log_uniform(rng, 1e-6, 1e3);
    EXPECT_EQ(track_average(v, v), v);
  }
}

TEST(Misalignment, IdenticalAttitudesGiveZero) {
  Engine rng(4);
  const Eigen::Matrix3d c = anukf::testing::random_rotation(rng);
  const Misalignment m = misalignment_angles(c, c);
  EXPECT_LT(m.angles.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(m.gimbal);
  EXPECT_LT(mrmse({Series(10, m.angles)}).value, 1e-15);
}

TEST(Misalignment, SmallYaw) {
  Engine rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d truth = anukf::testing::random_rotation(rng);
    const Eigen::Matrix3d est = Eigen::AngleAxisd(1e-3, Eigen::Vector3d::UnitZ()).toRotationMatrix() * truth;
    const Misalignment m = misalignment_angles(est, truth);
    EXPECT_NEAR(m.angles(0), 1e-3, 1e-9);
    EXPECT_NEAR(m.angles(1), 0.0, 1e-9);
    EXPECT_NEAR(m.angles(2), 0.0, 1e-9);
  }
}

TEST(MisalignmentProperty, SwappingNegatesToFirstOrder) {
  Engine rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Matrix3d truth = anukf::testing::random_rotation(rng);
    const Eigen::Vector3d rv = anukf::testing::random_unit(rng) * anukf::testing::uniform(rng, 0.0, 0.03);
    const Eigen::Matrix3d est = nav::rodrigues(rv) * truth;
    const Eigen::Vector3d fwd = misalignment_angles(est, truth).angles;
    const Eigen::Vector3d back = misalignment_angles(truth, est).angles;
    EXPECT_LE((fwd + back).norm(), 1e-3);
  }
}

TEST(Misalignment, GimbalProximityFlagged) {
  const Eigen::Matrix3d est = nav::dcm_from_euler(0.0, 89.95 * std::numbers::pi / 180.0, 0.0);
  EXPECT_TRUE(misalignment_angles(est, Eigen::Matrix3d::Identity()).gimbal);
  const Eigen::Matrix3d ok = nav::dcm_from_euler(0.0, 89.8 * std::numbers::pi / 180.0, 0.0);
  EXPECT_FALSE(misalignment_angles(ok, Eigen::Matrix3d::Identity()).gimbal);
}
