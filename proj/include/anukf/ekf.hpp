#pragma once

#include <Eigen/Core>

#include "anukf/ukf.hpp"

namespace anukf::ekf {

/// Error-state EKF session. Dimension is taken from the initial state so the
/// same code serves the 12-state model and generic linear test systems.
struct EkfSession {
  ukf::GaussianState state;
};

/// mean ← Φ·mean, P ← Φ·P·Φᵀ + Q (symmetrized, PD-checked).
void ekf_predict(EkfSession& session, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& q);

/// Joseph-form update with a linear(ized) measurement matrix.
void ekf_update(EkfSession& session, const Eigen::MatrixXd& h_jac, const Eigen::MatrixXd& r,
                const Eigen::VectorXd& z);

}  // namespace anukf::ekf
