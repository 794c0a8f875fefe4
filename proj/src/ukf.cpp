#include "anukf/ukf.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "anukf/errors.hpp"

namespace anukf::ukf {

UtParams UtParams::make(int n, double alpha, double beta, double kappa, CovWeightForm form) {
  if (n < 1) throw InvalidInput("UT state dimension must be at least 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("UT alpha must be positive");
  if (!std::isfinite(beta) || !std::isfinite(kappa)) throw InvalidInput("UT beta/kappa must be finite");
  UtParams p;
  p.n = n;
  p.alpha = alpha;
  p.beta = beta;
  p.kappa = kappa;
  p.lambda = alpha * alpha * (n + kappa) - n;
  p.form = form;
  if (p.spread() == 0.0) throw InvalidInput("UT scaling n + lambda is zero");
  return p;
}

UtWeights compute_weights(const UtParams& params) {
  const double c = params.spread();
  if (c == 0.0 || !std::isfinite(c)) throw InvalidInput("UT scaling n + lambda is zero");
  const int count = 2 * params.n + 1;
  // For small alpha the weights reach ±1e8 and λ/(n+λ) alone would leave the
  // sum off by ~1e-8. Rounding wᵢ to a mantissa short enough that 2n·wᵢ is
  // exact, and taking w₀ = 1 − 2n·wᵢ (also exact), makes the stored weights
  // sum to one exactly; the rounding moves wᵢ by at most 2⁻⁴⁶ relative.
  int exponent = 0;
  const double mantissa = std::frexp(1.0 / (2.0 * c), &exponent);
  const int bits = std::numeric_limits<double>::digits - std::bit_width(static_cast<unsigned>(2 * params.n));
  const double wi = std::ldexp(std::nearbyint(std::ldexp(mantissa, bits)), exponent - bits);
  UtWeights w;
  w.wm = Eigen::VectorXd::Constant(count, wi);
  w.wc = w.wm;
  const double a2 = params.alpha * params.alpha;
  w.wm(0) = 1.0 - 2.0 * params.n * wi;
  const double extra = params.form == CovWeightForm::AsPrinted ? (1.0 + a2 + params.beta)
                                                                : (1.0 - a2 + params.beta);
  w.wc(0) = w.wm(0) + extra;
  return w;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidInput("Cholesky requires a square matrix");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(static_cast<int>(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

SigmaPointSet generate_sigma_points(const GaussianState& state, const UtParams& params) {
  const int n = params.n;
  if (state.mean.size() != n || state.cov.rows() != n || state.cov.cols() != n) {
    throw InvalidInput("sigma point generation: state dimension does not match UT parameters");
  }
  const double c = params.spread();
  if (!(c > 0.0)) throw InvalidInput("sigma point generation requires n + lambda > 0");

  // Columns of the lower factor of (n+λ)P, i.e. rows of its transpose.
  const Eigen::MatrixXd root = std::sqrt(c) * cholesky_lower(state.cov);

  SigmaPointSet set;
  set.params = params;
  set.points.resize(n, 2 * n + 1);
  set.points.col(0) = state.mean;
  for (int i = 0; i < n; ++i) {
    set.points.col(1 + i) = state.mean + root.col(i);
    set.points.col(1 + n + i) = state.mean - root.col(i);
  }
  return set;
}

namespace {

// Σ wᵢ xᵢ written as x₀ + Σ_{i≥1} wᵢ (xᵢ − x₀), which uses Σ w = 1 and avoids
// the cancellation between the large negative w₀ and the outer weights.
Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& points, const Eigen::VectorXd& wm) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(points.rows());
  for (Eigen::Index i = 1; i < points.cols(); ++i) {
    mean += wm(i) * (points.col(i) - points.col(0));
  }
  return points.col(0) + mean;
}

}  // namespace

GaussianState reconstruct(const Eigen::MatrixXd& points, const UtWeights& weights) {
  GaussianState out;
  out.mean = weighted_mean(points, weights.wm);
  const Eigen::MatrixXd dev = points.colwise() - out.mean;
  out.cov = dev * weights.wc.asDiagonal() * dev.transpose();
  return out;
}

GaussianState time_update(const SigmaPointSet& points, const ProcessMap& f,
                          const UtWeights& weights, const Eigen::MatrixXd& q) {
  const Eigen::Index n = points.points.rows();
  if (q.rows() != n || q.cols() != n) throw InvalidInput("time update: Q dimension mismatch");
  if (weights.wm.size() != points.points.cols()) throw InvalidInput("time update: weight count mismatch");

  Eigen::MatrixXd propagated(n, points.points.cols());
  for (Eigen::Index i = 0; i < points.points.cols(); ++i) {
    Eigen::VectorXd xi = f(points.points.col(i));
    if (xi.size() != n) throw InvalidInput("time update: process mapping changed the state dimension");
    if (!xi.allFinite()) throw PropagationDivergence(static_cast<int>(i));
    propagated.col(i) = xi;
  }
  GaussianState out = reconstruct(propagated, weights);
  out.cov = symmetrize(out.cov + q);
  return out;
}

void require_positive_definite(const Eigen::MatrixXd& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() == Eigen::Success && p.allFinite()) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p, Eigen::EigenvaluesOnly);
  const double min_eig = eig.info() == Eigen::Success ? eig.eigenvalues().minCoeff()
                                                       : std::numeric_limits<double>::quiet_NaN();
  throw ConditioningError(min_eig);
}

GaussianState measurement_update(const GaussianState& pred, const MeasurementMap& h,
                                 const UtWeights& weights, const Eigen::MatrixXd& r,
                                 const Eigen::VectorXd& z, const UtParams& params) {
  const SigmaPointSet sp = generate_sigma_points(pred, params);
  const Eigen::Index cols = sp.points.cols();
  const Eigen::Index m = z.size();
  if (r.rows() != m || r.cols() != m) throw InvalidInput("measurement update: R dimension mismatch");

  Eigen::MatrixXd zs(m, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    Eigen::VectorXd zi = h(sp.points.col(i));
    if (zi.size() != m) throw InvalidInput("measurement update: observation dimension mismatch");
    if (!zi.allFinite()) throw PropagationDivergence(static_cast<int>(i));
    zs.col(i) = zi;
  }
  const Eigen::VectorXd zhat = weighted_mean(zs, weights.wm);
  const Eigen::MatrixXd dz = zs.colwise() - zhat;
  const Eigen::MatrixXd dx = sp.points.colwise() - pred.mean;

  const Eigen::MatrixXd s = symmetrize(dz * weights.wc.asDiagonal() * dz.transpose() + r);
  const Eigen::MatrixXd pxz = dx * weights.wc.asDiagonal() * dz.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success || !s.allFinite()) throw SingularInnovation();
  // K = Pxz S⁻¹, solved as (S⁻¹ Pxzᵀ)ᵀ.
  const Eigen::MatrixXd k = llt.solve(pxz.transpose()).transpose();

  GaussianState out;
  out.mean = pred.mean + k * (z - zhat);
  out.cov = symmetrize(pred.cov - k * s * k.transpose());
  require_positive_definite(out.cov);
  return out;
}

UnscentedFilter::UnscentedFilter(GaussianState initial, const UtParams& params)
    : state_(std::move(initial)), params_(params), weights_(compute_weights(params)) {
  if (state_.mean.size() != params.n) throw InvalidInput("filter state dimension mismatch");
}

void UnscentedFilter::predict(const ProcessMap& f, const Eigen::MatrixXd& q) {
  state_ = time_update(generate_sigma_points(state_, params_), f, weights_, q);
}

void UnscentedFilter::update(const MeasurementMap& h, const Eigen::MatrixXd& r, const Eigen::VectorXd& z) {
  state_ = measurement_update(state_, h, weights_, r, z, params_);
}

}  // namespace anukf::ukf
