#include <gtest/gtest.h>

#include "anukf/ekf.hpp"
#include "anukf/errors.hpp"
#include "anukf/insdvl.hpp"
#include "support.hpp"

using namespace anukf;
using anukf::testing::Engine;

TEST(EkfPredict, IdentityNoNoise) {
  Engine rng(1);
  ekf::EkfSession s{{anukf::testing::gaussian_vector(rng, 4), anukf::testing::random_spd(rng, 4)}};
  const auto before = s.state;
  ekf::ekf_predict(s, Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 4));
  EXPECT_TRUE(s.state.mean == before.mean);
  EXPECT_LT((s.state.cov - before.cov).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EkfPredict, AddsNoise) {
  Engine rng(2);
  ekf::EkfSession s{{Eigen::VectorXd::Zero(3), anukf::testing::random_spd(rng, 3)}};
  const auto before = s.state;
  const Eigen::MatrixXd q = Eigen::Vector3d(1e-3, 2e-3, 3e-3).asDiagonal();
  ekf::ekf_predict(s, Eigen::MatrixXd::Identity(3, 3), q);
  EXPECT_LT((s.state.cov - before.cov - q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EkfPredict, LosingDefinitenessIsReported) {
  ekf::EkfSession s{{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)}};
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(2, 2);
  phi(1, 1) = 0.0;
  EXPECT_THROW(ekf::ekf_predict(s, phi, Eigen::MatrixXd::Zero(2, 2)), ConditioningError);
}

TEST(EkfUpdate, ZeroInnovationKeepsMean) {
  Engine rng(3);
  ekf::EkfSession s{{anukf::testing::gaussian_vector(rng, 5), anukf::testing::random_spd(rng, 5)}};
  const Eigen::MatrixXd h = anukf::testing::gaussian_matrix(rng, 3, 5);
  const Eigen::VectorXd mean = s.state.mean;
  ekf::ekf_update(s, h, Eigen::MatrixXd::Identity(3, 3), h * mean);
  EXPECT_LT((s.state.mean - mean).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EkfUpdate, HugeNoiseMeansNoShift) {
  ekf::EkfSession s{{Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4)}};
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 4);
  h(0, 0) = 1.0;
  ekf::ekf_update(s, h, Eigen::MatrixXd::Constant(1, 1, 1e14), Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_LT(s.state.mean.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EkfUpdate, SingularInnovation) {
  ekf::EkfSession s{{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)}};
  EXPECT_THROW(ekf::ekf_update(s, Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)),
               SingularInnovation);
}

TEST(EkfUpdateProperty, JosephKeepsSymmetryAndDefiniteness) {
  Engine rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = anukf::testing::uniform_int(rng, 2, 12);
    const int m = anukf::testing::uniform_int(rng, 1, n);
    ekf::EkfSession s{{anukf::testing::gaussian_vector(rng, n), anukf::testing::random_spd(rng, n, 1e-4, 1e2)}};
    ekf::ekf_update(s, anukf::testing::gaussian_matrix(rng, m, n), anukf::testing::random_spd(rng, m, 1e-4, 1.0),
                    anukf::testing::gaussian_vector(rng, m));
    EXPECT_TRUE(s.state.cov == s.state.cov.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(s.state.cov);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
}

TEST(EkfProperty, LinearSystemMatchesUnscentedFilter) {
  Engine rng(5);
  const int n = 12;
  const Eigen::MatrixXd a = anukf::testing::stable_dynamics(rng, n, 0.03);
  const Eigen::MatrixXd h = anukf::testing::gaussian_matrix(rng, 3, n);
  const Eigen::MatrixXd q = anukf::testing::random_spd(rng, n, 1e-4, 1e-2);
  const Eigen::MatrixXd r = anukf::testing::random_spd(rng, 3, 1e-2, 1e-1);
  const ukf::GaussianState init{Eigen::VectorXd::Zero(n), anukf::testing::random_spd(rng, n)};
  ekf::EkfSession e{init};
  ukf::UnscentedFilter u(init, ukf::UtParams::make(n));
  for (int k = 0; k < 100; ++k) {
    ekf::ekf_predict(e, a, q);
    u.predict([&a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; }, q);
    const Eigen::VectorXd z = anukf::testing::gaussian_vector(rng, 3);
    ekf::ekf_update(e, h, r, z);
    u.update([&h](const Eigen::VectorXd& x) -> Eigen::VectorXd { return h * x; }, r, z);
    ASSERT_LT((e.state.mean - u.state().mean).cwiseAbs().maxCoeff(), 1e-7) << k;
    ASSERT_LT(anukf::testing::rel_max_error(e.state.cov, u.state().cov), 1e-7) << k;
  }
}

// Near the linearization point the DVL map is almost linear, so both updates agree.
TEST(EkfUpdate, AgreesWithUnscentedOnDvlModel) {
  Engine rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const nav::NavState nav = anukf::testing::random_nav(rng);
    Eigen::VectorXd sd(12);
    sd << Eigen::Vector3d::Constant(0.05), Eigen::Vector3d::Constant(1e-3), Eigen::Vector3d::Constant(0.01),
        Eigen::Vector3d::Constant(1e-5);
    const ukf::GaussianState prior{Eigen::VectorXd::Zero(12), Eigen::MatrixXd(sd.cwiseAbs2().asDiagonal())};
    const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() * 4e-4;
    const Eigen::Vector3d z = anukf::testing::gaussian_vector(rng, 3, 0.05);

    ekf::EkfSession e{prior};
    ekf::ekf_update(e, insdvl::dvl_jacobian(nav), r, z);
    const auto p = ukf::UtParams::make(12);
    const auto u = ukf::measurement_update(
        prior, [&nav](const Eigen::VectorXd& x) -> Eigen::VectorXd { return insdvl::dvl_measurement_map(x, nav); },
        ukf::compute_weights(p), r, z, p);
    EXPECT_LT((e.state.mean - u.mean).cwiseAbs().maxCoeff(), 1e-4);
  }
}
