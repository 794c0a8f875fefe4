#pragma once

#include <functional>

#include <Eigen/Core>

namespace anukf::ukf {

/// Zeroth covariance weight variant. `AsPrinted` adds (1 + α² + β), `Canonical`
/// adds the usual (1 − α² + β).
enum class CovWeightForm { AsPrinted, Canonical };

/**
 * Scaled unscented transform parameters.
 *
 * Build through `UtParams::make`, which derives lambda = α²(n+κ) − n and
 * rejects α ≤ 0 or n + λ = 0.
 */
struct UtParams {
  int n = 0;
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
  double lambda = 0.0;
  CovWeightForm form = CovWeightForm::AsPrinted;

  static UtParams make(int n, double alpha = 1e-3, double beta = 2.0, double kappa = 0.0,
                       CovWeightForm form = CovWeightForm::AsPrinted);

  /// n + λ, evaluated as α²(n+κ) to avoid cancellation when α is small.
  double spread() const { return alpha * alpha * (n + kappa); }
};

struct UtWeights {
  Eigen::VectorXd wm;
  Eigen::VectorXd wc;
};

struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// 2n+1 sigma points stored as columns of an n×(2n+1) matrix; column 0 is the mean.
struct SigmaPointSet {
  Eigen::MatrixXd points;
  UtParams params;
};

using ProcessMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MeasurementMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

UtWeights compute_weights(const UtParams& params);

/// Lower Cholesky factor of a symmetric matrix. Throws NotPositiveDefinite with
/// the failing pivot index.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

SigmaPointSet generate_sigma_points(const GaussianState& state, const UtParams& params);

/// Weighted mean and spread of a sigma-point set (no additive noise).
GaussianState reconstruct(const Eigen::MatrixXd& points, const UtWeights& weights);

GaussianState time_update(const SigmaPointSet& points, const ProcessMap& f,
                          const UtWeights& weights, const Eigen::MatrixXd& q);

GaussianState measurement_update(const GaussianState& pred, const MeasurementMap& h,
                                 const UtWeights& weights, const Eigen::MatrixXd& r,
                                 const Eigen::VectorXd& z, const UtParams& params);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& p) { return 0.5 * (p + p.transpose()); }

/// Throws ConditioningError carrying the smallest eigenvalue if `p` is not PD.
void require_positive_definite(const Eigen::MatrixXd& p);

/// A filter session: owns its state and caches the weights for its parameters.
class UnscentedFilter {
 public:
  UnscentedFilter(GaussianState initial, const UtParams& params);

  void predict(const ProcessMap& f, const Eigen::MatrixXd& q);
  void update(const MeasurementMap& h, const Eigen::MatrixXd& r, const Eigen::VectorXd& z);

  const GaussianState& state() const { return state_; }
  GaussianState& state() { return state_; }
  const UtParams& params() const { return params_; }
  const UtWeights& weights() const { return weights_; }

 private:
  GaussianState state_;
  UtParams params_;
  UtWeights weights_;
};

}  // namespace anukf::ukf
