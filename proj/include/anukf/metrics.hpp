#pragma once

#include <vector>

#include <Eigen/Core>

namespace anukf::metrics {

/// Thin unit wrappers so a velocity RMS cannot be passed where an angle RMS
/// is expected.
struct MetersPerSecond {
  double value = 0.0;
};
struct Radians {
  double value = 0.0;
};

/// Per-step error vectors of one Monte Carlo run.
using Series = std::vector<Eigen::Vector3d>;

/// Pairwise (tree) sum with a fixed fan-in of two; deterministic for a given order.
double pairwise_sum(const std::vector<double>& values);

/// √(mean of ‖e‖² over all runs and steps). Runs must share one step count.
double rms_of_norms(const std::vector<Series>& runs);

inline MetersPerSecond vrmse(const std::vector<Series>& velocity_errors) { return {rms_of_norms(velocity_errors)}; }
inline Radians mrmse(const std::vector<Series>& misalignment) { return {rms_of_norms(misalignment)}; }

/// √((a² + b²)/2).
double track_average(double a, double b);

struct Misalignment {
  Eigen::Vector3d angles = Eigen::Vector3d::Zero();  ///< (yaw, pitch, roll)
  bool gimbal = false;                               ///< |pitch| > 89.9°
};

/// Euler angles of C_bⁿ(estimate)·C_nᵇ(truth).
Misalignment misalignment_angles(const Eigen::Matrix3d& c_bn_est, const Eigen::Matrix3d& c_bn_truth);

}  // namespace anukf::metrics
