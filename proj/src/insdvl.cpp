#include "anukf/insdvl.hpp"

#include <cmath>

#include "anukf/errors.hpp"

namespace anukf::insdvl {

using nav::skew;

Vector12 ErrorState12::pack() const {
  Vector12 x;
  x << dv_n, dpsi_n, ba, bg;
  return x;
}

ErrorState12 ErrorState12::unpack(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 12) throw InvalidInput("error state must have 12 elements");
  ErrorState12 e;
  e.dv_n = x.segment<3>(kVel);
  e.dpsi_n = x.segment<3>(kPsi);
  e.ba = x.segment<3>(kAccBias);
  e.bg = x.segment<3>(kGyroBias);
  return e;
}

void NoiseSpec::validate() const {
  for (double s : {sigma_a, sigma_g, sigma_ab, sigma_gb}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("noise standard deviations must be positive");
  }
}

Matrix12 build_f_matrix(const NavState& nav, const Vec3& f_b) {
  if (!f_b.allFinite() || !nav.c_bn.allFinite()) throw InvalidInput("non-finite input to F");
  const Mat3& c = nav.c_bn;
  Matrix12 f = Matrix12::Zero();
  f.block<3, 3>(kVel, kPsi) = skew(c * f_b);
  f.block<3, 3>(kVel, kAccBias) = -c;
  f.block<3, 3>(kPsi, kGyroBias) = c;
  return f;
}

Matrix12 build_g_matrix(const NavState& nav) {
  Matrix12 g = Matrix12::Identity();
  g.block<3, 3>(kVel, kVel) = nav.c_bn;
  g.block<3, 3>(kPsi, kPsi) = nav.c_bn;
  return g;
}

Matrix12 discretize(const Matrix12& f, double dt) {
  if (!(dt > 0.0) || dt > 1.0) throw InvalidInput("discretization step must lie in (0, 1] s");
  const Matrix12 fdt = f * dt;
  return Matrix12::Identity() + fdt + 0.5 * fdt * fdt;
}

Matrix12 build_q_discrete(const Matrix12& g, const Matrix12& qstar, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("Q discretization requires dt > 0");
  if ((qstar.diagonal().array() < 0.0).any()) throw InvalidInput("Q* has a negative diagonal entry");
  const Matrix12 q = g * qstar.diagonal().asDiagonal() * g.transpose();
  return 0.5 * (q + q.transpose());
}

Matrix12 qstar_from_noise(const NoiseSpec& noise, double imu_dt, double interval) {
  noise.validate();
  if (!(imu_dt > 0.0) || !(interval > 0.0)) throw InvalidInput("intervals must be positive");
  Vector12 d;
  d.segment<3>(kVel).setConstant(noise.sigma_a * noise.sigma_a * imu_dt * interval);
  d.segment<3>(kPsi).setConstant(noise.sigma_g * noise.sigma_g * imu_dt * interval);
  d.segment<3>(kAccBias).setConstant(noise.sigma_ab * noise.sigma_ab * interval);
  d.segment<3>(kGyroBias).setConstant(noise.sigma_gb * noise.sigma_gb * interval);
  return d.asDiagonal();
}

Vec3 dvl_measurement_map(const Eigen::Ref<const Eigen::VectorXd>& err, const NavState& nav) {
  if (err.size() != 12) throw InvalidInput("error state must have 12 elements");
  const Mat3 c_nb = nav.c_bn.transpose();
  const Mat3 c_err = nav::rodrigues(err.segment<3>(kPsi));
  return c_nb * (c_err * (nav.v_n + err.segment<3>(kVel))) - c_nb * nav.v_n;
}

Vec3 dvl_innovation(const NavState& nav, const Vec3& dvl_v_b) {
  if (!dvl_v_b.allFinite()) throw InvalidInput("non-finite DVL sample");
  return dvl_v_b - nav.c_bn.transpose() * nav.v_n;
}

Matrix3x12 dvl_jacobian(const NavState& nav) {
  const Mat3 c_nb = nav.c_bn.transpose();
  Matrix3x12 h = Matrix3x12::Zero();
  h.block<3, 3>(0, kVel) = c_nb;
  h.block<3, 3>(0, kPsi) = -c_nb * skew(nav.v_n);
  return h;
}

}  // namespace anukf::insdvl
