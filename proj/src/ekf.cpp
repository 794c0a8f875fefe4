#include "anukf/ekf.hpp"

#include <Eigen/Cholesky>

#include "anukf/errors.hpp"

namespace anukf::ekf {

void ekf_predict(EkfSession& session, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& q) {
  auto& s = session.state;
  const Eigen::Index n = s.mean.size();
  if (phi.rows() != n || phi.cols() != n || q.rows() != n || q.cols() != n) {
    throw InvalidInput("EKF predict: dimension mismatch");
  }
  s.mean = phi * s.mean;
  s.cov = ukf::symmetrize(phi * s.cov * phi.transpose() + q);
  ukf::require_positive_definite(s.cov);
}

void ekf_update(EkfSession& session, const Eigen::MatrixXd& h, const Eigen::MatrixXd& r,
                const Eigen::VectorXd& z) {
  auto& s = session.state;
  const Eigen::Index n = s.mean.size();
  const Eigen::Index m = z.size();
  if (h.rows() != m || h.cols() != n || r.rows() != m || r.cols() != m) {
    throw InvalidInput("EKF update: dimension mismatch");
  }
  const Eigen::MatrixXd pht = s.cov * h.transpose();
  const Eigen::MatrixXd innov_cov = ukf::symmetrize(h * pht + r);
  Eigen::LLT<Eigen::MatrixXd> llt(innov_cov);
  if (llt.info() != Eigen::Success || !innov_cov.allFinite()) throw SingularInnovation();
  const Eigen::MatrixXd k = llt.solve(pht.transpose()).transpose();

  s.mean = s.mean + k * (z - h * s.mean);
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - k * h;
  s.cov = ukf::symmetrize(ikh * s.cov * ikh.transpose() + k * r * k.transpose());
  ukf::require_positive_definite(s.cov);
}

}  // namespace anukf::ekf
