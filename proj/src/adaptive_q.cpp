#include "anukf/adaptive_q.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anukf/errors.hpp"

namespace anukf::adaptive {

Matrix12 QNetDiag::matrix() const {
  insdvl::Vector12 d;
  d << q_v, q_psi, q_a, q_g;
  return d.asDiagonal();
}

void ClampBounds::validate() const {
  for (int b = 0; b < 4; ++b) {
    if (!(lo[b] > 0.0) || !(hi[b] > lo[b]) || !std::isfinite(hi[b])) {
      throw InvalidInput("clamp bounds must satisfy 0 < min < max for every block");
    }
  }
}

QNetDiag assemble_qnet_diag(const Eigen::Vector3d& acc_out, const Eigen::Vector3d& gyro_out, const TauFactors& tau) {
  QNetDiag q;
  q.q_a = acc_out * tau.tau;
  q.q_v = q.q_a * tau.tau_a;
  q.q_g = gyro_out * tau.tau;
  q.q_psi = q.q_g * tau.tau_g;
  return q;
}

ClampResult validate_clamp(const Matrix12& qnet, const ClampBounds& bounds, const Matrix12& fallback) {
  bounds.validate();
  ClampResult r;
  r.q = Matrix12::Zero();
  for (int i = 0; i < 12; ++i) {
    const int block = i / 3;
    double v = qnet(i, i);
    if (!std::isfinite(v)) {
      v = fallback(i, i);
      ++r.replaced_nonfinite;
    }
    const double c = std::clamp(v, bounds.lo[block], bounds.hi[block]);
    if (c != v) ++r.clamp_events;
    r.q(i, i) = c;
  }
  return r;
}

Matrix12 adapt_q(const Matrix12& g, const Matrix12& qnet_validated) {
  const Matrix12 q = g * qnet_validated * g.transpose();
  return 0.5 * (q + q.transpose());
}

ProcessNetRegressor::ProcessNetRegressor(net::ProcessNetModel accel, net::ProcessNetModel gyro)
    : accel_(std::move(accel)), gyro_(std::move(gyro)) {
  accel_.validate();
  gyro_.validate();
}

namespace {

Eigen::Vector3d guarded_forward(const net::ProcessNetModel& model, const net::ImuWindow& w) {
  try {
    return net::forward(model, w);
  } catch (const NumericFault&) {
    return Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  }
}

}  // namespace

Eigen::Vector3d ProcessNetRegressor::accel(const net::ImuWindow& w) const { return guarded_forward(accel_, w); }
Eigen::Vector3d ProcessNetRegressor::gyro(const net::ImuWindow& w) const { return guarded_forward(gyro_, w); }

AdaptiveQOutput adaptive_q_step(const NoiseRegressor& regressor, const net::ImuWindow& accel_window,
                                const net::ImuWindow& gyro_window, const Matrix12& g,
                                const AdaptiveQConfig& config, const Matrix12& static_qstar) {
  const Matrix12 raw = assemble_qnet(regressor.accel(accel_window), regressor.gyro(gyro_window), config.tau);
  const ClampResult clamped = validate_clamp(raw, config.bounds, static_qstar);
  AdaptiveQOutput out;
  out.qnet = clamped.q;
  out.q = adapt_q(g, clamped.q);
  out.clamp_events = clamped.clamp_events;
  out.replaced_nonfinite = clamped.replaced_nonfinite;
  return out;
}

}  // namespace anukf::adaptive
