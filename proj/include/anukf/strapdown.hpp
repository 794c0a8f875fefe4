#pragma once

#include <Eigen/Core>

namespace anukf::nav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vector12 = Eigen::Matrix<double, 12, 1>;

/// Navigation solution carried by the mechanization. Frames: body (x fwd, y
/// right, z down) and local-level NED navigation frame.
struct NavState {
  Mat3 c_bn = Mat3::Identity();  ///< body → navigation DCM
  Vec3 v_n = Vec3::Zero();       ///< m/s, NED
  Vec3 b_a_hat = Vec3::Zero();   ///< m/s²
  Vec3 b_g_hat = Vec3::Zero();   ///< rad/s
  double t = 0.0;                ///< s
};

struct ImuSample {
  Vec3 f_b = Vec3::Zero();  ///< specific force, m/s²
  Vec3 w_b = Vec3::Zero();  ///< angular rate, rad/s
  double t = 0.0;
};

inline Vec3 default_gravity() { return Vec3(0.0, 0.0, 9.7963); }

Mat3 skew(const Vec3& u);

/// Exact rotation matrix of a rotation vector.
Mat3 rodrigues(const Vec3& rotvec);

/// Rotation vector of a rotation matrix (inverse of `rodrigues` for angles < π).
Vec3 rotation_vector(const Mat3& c);

/// Pulls a nearly orthonormal matrix back onto SO(3).
Mat3 orthonormalize(const Mat3& c);

double orthonormality_error(const Mat3& c);

/// Z-Y-X Euler angles of a body→nav DCM, returned as (yaw, pitch, roll).
Vec3 euler_zyx(const Mat3& c_bn);
Mat3 dcm_from_euler(double yaw, double pitch, double roll);

/// One strapdown step: attitude by the exact rotation of the bias-corrected
/// rate, velocity by the bias-corrected specific force resolved with the
/// attitude at the start of the step, plus gravity.
NavState mechanize_step(const NavState& nav, const ImuSample& imu, double dt,
                        const Vec3& gravity_n = default_gravity());

/// Closed-loop feedback of a 12-element error state [δv, δΨ, b_a, b_g].
/// δv is truth minus estimate and is added; the attitude error is the
/// rotation from true to computed navigation frame and is removed by
/// left-multiplying R(−δΨ); bias residuals are added to the bias estimates.
NavState apply_error_correction(const NavState& nav, const Vector12& err);

}  // namespace anukf::nav
