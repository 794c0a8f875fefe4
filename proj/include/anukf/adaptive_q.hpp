#pragma once

#include <array>
#include <memory>

#include "anukf/insdvl.hpp"
#include "anukf/processnet.hpp"

namespace anukf::adaptive {

using insdvl::Matrix12;

struct QNetDiag {
  Eigen::Vector3d q_v = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_psi = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_g = Eigen::Vector3d::Zero();

  Matrix12 matrix() const;
};

/// Time factors: τ multiplies the raw network variance, τ_a and τ_g turn the
/// sensor terms into velocity and orientation terms.
struct TauFactors {
  double tau = 0.01;
  double tau_a = 1.0;
  double tau_g = 1.0;
};

/// Per-block clamp interval, indexed in error-state block order
/// (velocity, orientation, accelerometer bias, gyroscope bias).
struct ClampBounds {
  std::array<double, 4> lo{1e-12, 1e-18, 1e-12, 1e-18};
  std::array<double, 4> hi{1e2, 1e-6, 1e2, 1e-6};

  void validate() const;
};

struct ClampResult {
  Matrix12 q;
  int clamp_events = 0;
  int replaced_nonfinite = 0;
};

QNetDiag assemble_qnet_diag(const Eigen::Vector3d& acc_out, const Eigen::Vector3d& gyro_out, const TauFactors& tau);

inline Matrix12 assemble_qnet(const Eigen::Vector3d& acc_out, const Eigen::Vector3d& gyro_out,
                              const TauFactors& tau) {
  return assemble_qnet_diag(acc_out, gyro_out, tau).matrix();
}

/// Clamps each diagonal entry into its block's interval. Non-finite entries are
/// replaced by the matching entry of `fallback` (the static model) and counted
/// separately from clamp events.
ClampResult validate_clamp(const Matrix12& qnet, const ClampBounds& bounds, const Matrix12& fallback);

/// Q̂ = G·Qnet·Gᵀ.
Matrix12 adapt_q(const Matrix12& g, const Matrix12& qnet_validated);

/// Source of the two network outputs for one window pair. Implementations are
/// ProcessNet pairs or fixed oracles.
class NoiseRegressor {
 public:
  virtual ~NoiseRegressor() = default;
  virtual Eigen::Vector3d accel(const net::ImuWindow& w) const = 0;
  virtual Eigen::Vector3d gyro(const net::ImuWindow& w) const = 0;
};

class ProcessNetRegressor final : public NoiseRegressor {
 public:
  ProcessNetRegressor(net::ProcessNetModel accel, net::ProcessNetModel gyro);
  /// A numeric fault inside the network yields NaN outputs, which the clamp
  /// stage replaces with the static values.
  Eigen::Vector3d accel(const net::ImuWindow& w) const override;
  Eigen::Vector3d gyro(const net::ImuWindow& w) const override;

 private:
  net::ProcessNetModel accel_;
  net::ProcessNetModel gyro_;
};

/// Emits fixed variances regardless of the window.
class ConstantRegressor final : public NoiseRegressor {
 public:
  ConstantRegressor(Eigen::Vector3d accel_var, Eigen::Vector3d gyro_var)
      : accel_(std::move(accel_var)), gyro_(std::move(gyro_var)) {}
  Eigen::Vector3d accel(const net::ImuWindow&) const override { return accel_; }
  Eigen::Vector3d gyro(const net::ImuWindow&) const override { return gyro_; }

 private:
  Eigen::Vector3d accel_;
  Eigen::Vector3d gyro_;
};

struct AdaptiveQConfig {
  TauFactors tau;
  ClampBounds bounds;
};

struct AdaptiveQOutput {
  Matrix12 q;      ///< G·Qnet·Gᵀ
  Matrix12 qnet;   ///< validated diagonal
  int clamp_events = 0;
  int replaced_nonfinite = 0;
};

/// Full pipeline for one propagation interval.
AdaptiveQOutput adaptive_q_step(const NoiseRegressor& regressor, const net::ImuWindow& accel_window,
                                const net::ImuWindow& gyro_window, const Matrix12& g,
                                const AdaptiveQConfig& config, const Matrix12& static_qstar);

}  // namespace anukf::adaptive
