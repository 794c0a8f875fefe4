#include "anukf/strapdown.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "anukf/errors.hpp"

namespace anukf::nav {

Mat3 skew(const Vec3& u) {
  Mat3 s;
  s << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
       -u.y(), u.x(), 0.0;
  return s;
}

Mat3 rodrigues(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  const Mat3 k = skew(rotvec);
  if (angle < 1e-8) {
    // Second-order series; the truncation error is O(angle³), far below rounding here.
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 rotation_vector(const Mat3& c) {
  const Vec3 axis_sin(c(2, 1) - c(1, 2), c(0, 2) - c(2, 0), c(1, 0) - c(0, 1));  // 2 sinθ · axis
  const double cos_angle = std::clamp(0.5 * (c.trace() - 1.0), -1.0, 1.0);
  const double sin_angle = 0.5 * axis_sin.norm();
  const double angle = std::atan2(sin_angle, cos_angle);
  if (angle < 1e-8) return 0.5 * axis_sin;
  return axis_sin * (angle / (2.0 * sin_angle));
}

double orthonormality_error(const Mat3& c) {
  return (c * c.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 orthonormalize(const Mat3& c) {
  if (orthonormality_error(c) < 1e-6) {
    // One Newton step towards the polar factor; quadratic convergence.
    return 1.5 * c - 0.5 * c * c.transpose() * c;
  }
  Eigen::JacobiSVD<Mat3> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

Vec3 euler_zyx(const Mat3& c) {
  const double pitch = -std::asin(std::clamp(c(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(c(1, 0), c(0, 0));
  const double roll = std::atan2(c(2, 1), c(2, 2));
  return Vec3(yaw, pitch, roll);
}

Mat3 dcm_from_euler(double yaw, double pitch, double roll) {
  const Mat3 rz = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(pitch, Vec3::UnitY()).toRotationMatrix();
  const Mat3 rx = Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
  return rz * ry * rx;
}

NavState mechanize_step(const NavState& nav, const ImuSample& imu, double dt, const Vec3& gravity_n) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("mechanization step requires dt > 0");
  if (!imu.f_b.allFinite() || !imu.w_b.allFinite()) throw InvalidInput("non-finite IMU sample");

  NavState out = nav;
  out.v_n = nav.v_n + nav.c_bn * (imu.f_b - nav.b_a_hat) * dt + gravity_n * dt;
  out.c_bn = orthonormalize(nav.c_bn * rodrigues((imu.w_b - nav.b_g_hat) * dt));
  out.t = nav.t + dt;
  return out;
}

NavState apply_error_correction(const NavState& nav, const Vector12& err) {
  if (!err.allFinite()) throw InvalidInput("non-finite error-state correction");
  const Vec3 dpsi = err.segment<3>(3);
  const double angle = dpsi.norm();
  if (angle > 0.5) throw ImplausibleCorrection(angle);

  NavState out = nav;
  out.v_n = nav.v_n + err.segment<3>(0);
  if (angle > 0.0) out.c_bn = orthonormalize(rodrigues(-dpsi) * nav.c_bn);
  out.b_a_hat = nav.b_a_hat + err.segment<3>(6);
  out.b_g_hat = nav.b_g_hat + err.segment<3>(9);
  return out;
}

}  // namespace anukf::nav
