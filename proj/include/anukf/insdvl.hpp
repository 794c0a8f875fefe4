#pragma once

#include <Eigen/Core>

#include "anukf/strapdown.hpp"

namespace anukf::insdvl {

using nav::Mat3;
using nav::NavState;
using nav::Vec3;
using Matrix12 = Eigen::Matrix<double, 12, 12>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix3x12 = Eigen::Matrix<double, 3, 12>;

/// Offsets of the sub-vectors inside the 12-element error state.
enum Block : int { kVel = 0, kPsi = 3, kAccBias = 6, kGyroBias = 9 };

/// Named view of the error state; `pack`/`unpack` fix the layout.
struct ErrorState12 {
  Vec3 dv_n = Vec3::Zero();
  Vec3 dpsi_n = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();

  Vector12 pack() const;
  static ErrorState12 unpack(const Eigen::Ref<const Eigen::VectorXd>& x);
};

struct NoiseSpec {
  double sigma_a = 0.03;     ///< m/s² per IMU sample
  double sigma_g = 7.3e-6;   ///< rad/s per IMU sample
  double sigma_ab = 0.003;   ///< m/s² /√s
  double sigma_gb = 7.3e-7;  ///< rad/s /√s

  void validate() const;
};

/// Continuous error dynamics for the current navigation solution. `f_b` is the
/// bias-corrected specific force.
Matrix12 build_f_matrix(const NavState& nav, const Vec3& f_b);

/// blockdiag(C_bⁿ, C_bⁿ, I, I).
Matrix12 build_g_matrix(const NavState& nav);

/// Φ = I + F·dt + F²·dt²/2.
Matrix12 discretize(const Matrix12& f, double dt);

/// Q = G·Q*·Gᵀ; rejects negative entries on the diagonal of Q*.
Matrix12 build_q_discrete(const Matrix12& g, const Matrix12& qstar, double dt);

/// Diagonal Q* for one propagation interval `interval` with IMU samples every
/// `imu_dt`: white-noise terms accumulate as σ²·imu_dt·interval, the bias
/// random walks as σ²·interval.
Matrix12 qstar_from_noise(const NoiseSpec& noise, double imu_dt, double interval);

/// Predicted body-frame velocity discrepancy for an error hypothesis.
Vec3 dvl_measurement_map(const Eigen::Ref<const Eigen::VectorXd>& err, const NavState& nav);

/// Observed discrepancy: DVL body velocity minus the INS velocity in body axes.
Vec3 dvl_innovation(const NavState& nav, const Vec3& dvl_v_b);

/// First-order Jacobian of `dvl_measurement_map` at err = 0.
Matrix3x12 dvl_jacobian(const NavState& nav);

}  // namespace anukf::insdvl
