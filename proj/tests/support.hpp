#pragma once

// Hand-rolled generators shared by the property tests. Every generator takes
// the engine explicitly so a failing case can be replayed from its seed.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "anukf/strapdown.hpp"

namespace anukf::testing {

using Engine = std::mt19937_64;

inline double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Engine& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double log_uniform(Engine& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline Eigen::MatrixXd gaussian_matrix(Engine& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline Eigen::VectorXd gaussian_vector(Engine& rng, Eigen::Index n, double sd = 1.0) {
  return gaussian_matrix(rng, n, 1, sd);
}

/// SPD with eigenvalues spread over a bounded condition number.
inline Eigen::MatrixXd random_spd(Engine& rng, Eigen::Index n, double min_eig = 0.1, double max_eig = 10.0) {
  const Eigen::MatrixXd a = gaussian_matrix(rng, n, n);
  Eigen::MatrixXd q = a.householderQr().householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = log_uniform(rng, min_eig, max_eig);
  Eigen::MatrixXd p = q * d.asDiagonal() * q.transpose();
  return 0.5 * (p + p.transpose());
}

/// I + sd·N(0,1) rescaled to operator norm 0.99 when it exceeds that, so the
/// state stays bounded over long runs.
inline Eigen::MatrixXd stable_dynamics(Engine& rng, Eigen::Index n, double sd) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + gaussian_matrix(rng, n, n, sd);
  const double norm = a.operatorNorm();
  if (norm > 0.99) a *= 0.99 / norm;
  return a;
}

inline nav::Vec3 random_unit(Engine& rng) {
  nav::Vec3 v = gaussian_vector(rng, 3);
  return v.normalized();
}

inline nav::Mat3 random_rotation(Engine& rng) {
  return nav::rodrigues(random_unit(rng) * uniform(rng, 0.0, 3.0));
}

/// Attitude away from gimbal lock with a moderate velocity.
inline nav::NavState random_nav(Engine& rng) {
  nav::NavState s;
  s.c_bn = nav::dcm_from_euler(uniform(rng, -3.0, 3.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
  s.v_n = gaussian_vector(rng, 3, 2.0);
  s.b_a_hat = gaussian_vector(rng, 3, 0.1);
  s.b_g_hat = gaussian_vector(rng, 3, 1e-4);
  s.t = uniform(rng, 0.0, 100.0);
  return s;
}

/// max |a − b| / max(1, max |b|).
inline double rel_max_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Neumaier compensated sum, so checks on sums of large cancelling weights
/// measure the weights rather than the checker's own rounding.
template <typename Range>
double compensated_sum(const Range& values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

/// Textbook linear Kalman filter written independently of the library: explicit
/// inverse for the gain and the short covariance form.
struct LinearKf {
  Eigen::VectorXd x;
  Eigen::MatrixXd p;

  void predict(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    x = a * x;
    p = a * p * a.transpose() + q;
  }
  void update(const Eigen::MatrixXd& h, const Eigen::MatrixXd& r, const Eigen::VectorXd& z) {
    const Eigen::MatrixXd s = h * p * h.transpose() + r;
    const Eigen::MatrixXd k = p * h.transpose() * s.inverse();
    x = x + k * (z - h * x);
    p = (Eigen::MatrixXd::Identity(p.rows(), p.cols()) - k * h) * p;
    p = 0.5 * (p + p.transpose());
  }
};

}  // namespace anukf::testing
