#include "anukf/metrics.hpp"

#include <cmath>
#include <numbers>

#include "anukf/errors.hpp"
#include "anukf/strapdown.hpp"

namespace anukf::metrics {

namespace {

double tree_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  const std::size_t half = n / 2;
  return tree_sum(v, half) + tree_sum(v + half, n - half);
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) { return tree_sum(values.data(), values.size()); }

double rms_of_norms(const std::vector<Series>& runs) {
  if (runs.empty() || runs.front().empty()) throw InvalidInput("metric needs at least one run with one step");
  const std::size_t steps = runs.front().size();
  std::vector<double> sq;
  sq.reserve(runs.size() * steps);
  for (const auto& run : runs) {
    if (run.size() != steps) throw InvalidInput("runs have different step counts");
    for (const auto& e : run) sq.push_back(e.squaredNorm());
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double track_average(double a, double b) {
  if (a < 0.0 || b < 0.0) throw InvalidInput("track average expects nonnegative inputs");
  return std::sqrt(0.5 * (a * a + b * b));
}

Misalignment misalignment_angles(const Eigen::Matrix3d& c_bn_est, const Eigen::Matrix3d& c_bn_truth) {
  const Eigen::Matrix3d c = c_bn_est * c_bn_truth.transpose();
  Misalignment m;
  m.angles = nav::euler_zyx(c);
  m.gimbal = std::abs(m.angles(1)) > 89.9 * std::numbers::pi / 180.0;
  return m;
}

}  // namespace anukf::metrics
