#include "anukf/pipeline.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "anukf/ekf.hpp"
#include "anukf/errors.hpp"

namespace anukf::pipeline {

using insdvl::Matrix12;
using insdvl::Vector12;

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Ukf: return "ukf";
    case FilterKind::Anekf: return "anekf";
    case FilterKind::Anukf: return "anukf";
  }
  return "?";
}

FilterKind parse_filter(const std::string& name) {
  if (name == "ukf") return FilterKind::Ukf;
  if (name == "anekf") return FilterKind::Anekf;
  if (name == "anukf") return FilterKind::Anukf;
  throw ConfigError("unknown filter '" + name + "' (expected ukf, anekf or anukf)");
}

FilterConfig::FilterConfig() {
  const double deg = std::numbers::pi / 180.0;
  p0_std << 0.25, 0.25, 0.05, Eigen::Vector3d::Constant(0.01 * deg), Eigen::Vector3d::Constant(0.3),
      Eigen::Vector3d::Constant(7.3e-5);
}

namespace {

double nees_of(const Vector12& e, const Eigen::MatrixXd& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  const Eigen::VectorXd ev = e;
  return ev.dot(llt.solve(ev));
}

}  // namespace

RunResult run_filter(FilterKind kind, const RunInput& input, const FilterConfig& cfg,
                     const adaptive::NoiseRegressor* regressor) {
  if (!input.data) throw InvalidInput("run_filter needs a dataset");
  const sim::Dataset& d = *input.data;
  if (is_adaptive(kind) && !regressor) throw InvalidInput("adaptive filters need a noise regressor");
  if (cfg.ut.n != 12) throw InvalidInput("filter UT parameters must have n = 12");
  cfg.noise.validate();

  const int per = d.imu_per_dvl;
  const int epochs = static_cast<int>(d.imu.size()) / per;
  const double dt = d.imu_dt;
  const double interval = dt * per;
  const Matrix12 qstar = insdvl::qstar_from_noise(cfg.noise, dt, interval);
  const bool integrate_q = kind == FilterKind::Ukf && cfg.q_model == QModel::Integrated;
  const Matrix12 qstep = insdvl::qstar_from_noise(cfg.noise, dt, dt);
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() * cfg.dvl_noise_std * cfg.dvl_noise_std;

  ukf::GaussianState initial{Eigen::VectorXd::Zero(12), Eigen::MatrixXd(cfg.p0_std.cwiseAbs2().asDiagonal())};
  ukf::UnscentedFilter ukf_filter(initial, cfg.ut);
  ekf::EkfSession ekf_session{initial};
  const bool use_ekf = kind == FilterKind::Anekf;
  auto state = [&]() -> ukf::GaussianState& { return use_ekf ? ekf_session.state : ukf_filter.state(); };

  nav::NavState nav = sim::apply_initial_error(d.truth.front(), input.init);
  RunResult res;
  std::size_t dvl_idx = 0;
  double t_now = nav.t;

  try {
    for (int j = 1; j <= epochs; ++j) {
      Matrix12 phi = Matrix12::Identity();
      Matrix12 q_integrated = Matrix12::Zero();
      for (int k = (j - 1) * per; k < j * per; ++k) {
        const auto& s = d.imu[static_cast<std::size_t>(k)];
        const Matrix12 f = insdvl::build_f_matrix(nav, s.f_b - nav.b_a_hat);
        const Matrix12 phi_k = insdvl::discretize(f, dt);
        phi = phi_k * phi;
        nav = nav::mechanize_step(nav, s, dt, cfg.gravity);
        if (integrate_q) {
          const Matrix12 g_k = insdvl::build_g_matrix(nav);
          q_integrated = phi_k * q_integrated * phi_k.transpose() + g_k * qstep * g_k.transpose();
        }
      }
      t_now = nav.t;
      const Matrix12 g = insdvl::build_g_matrix(nav);

      Matrix12 q;
      if (is_adaptive(kind)) {
        const auto out = adaptive::adaptive_q_step(*regressor, sim::accel_window(d.imu, j, per),
                                                   sim::gyro_window(d.imu, j, per), g, cfg.adaptive, qstar);
        q = out.q;
        res.clamp_events += out.clamp_events;
        res.replaced_nonfinite += out.replaced_nonfinite;
      } else {
        q = integrate_q ? Matrix12(0.5 * (q_integrated + q_integrated.transpose()))
                        : insdvl::build_q_discrete(g, qstar, interval);
      }

      if (use_ekf) {
        ekf::ekf_predict(ekf_session, phi, q);
      } else {
        const Eigen::MatrixXd phi_dyn = phi;
        ukf_filter.predict([&phi_dyn](const Eigen::VectorXd& x) -> Eigen::VectorXd { return phi_dyn * x; }, q);
      }

      // DVL sample for this epoch, if one lands on it.
      bool updated = false;
      while (dvl_idx < d.dvl.size() && d.dvl[dvl_idx].t < t_now - 0.5 * dt) ++dvl_idx;
      if (dvl_idx < d.dvl.size() && std::abs(d.dvl[dvl_idx].t - t_now) <= 0.5 * dt && d.dvl[dvl_idx].valid) {
        const Eigen::Vector3d z = insdvl::dvl_innovation(nav, d.dvl[dvl_idx].v_b);
        if (use_ekf) {
          ekf::ekf_update(ekf_session, insdvl::dvl_jacobian(nav), r, z);
        } else {
          const nav::NavState nav_now = nav;
          ukf_filter.update(
              [&nav_now](const Eigen::VectorXd& e) -> Eigen::VectorXd { return insdvl::dvl_measurement_map(e, nav_now); },
              r, z);
        }
        updated = true;
      }

      // Closed-loop correction and reset.
      const Vector12 err = state().mean;
      nav = nav::apply_error_correction(nav, err);
      state().mean.setZero();

      const std::size_t ti = static_cast<std::size_t>(j) * static_cast<std::size_t>(per);
      const nav::NavState& truth = d.truth[ti];
      res.t.push_back(truth.t);
      res.vel_err.push_back(nav.v_n - truth.v_n);
      const auto mis = metrics::misalignment_angles(nav.c_bn, truth.c_bn);
      if (mis.gimbal) ++res.gimbal_flags;
      res.misalign.push_back(mis.angles);
      res.updated.push_back(updated);

      if (input.accel_bias && input.gyro_bias) {
        const std::size_t bi = std::min(ti, input.accel_bias->size() - 1);
        Vector12 e;
        e << truth.v_n - nav.v_n, nav::rotation_vector(nav.c_bn * truth.c_bn.transpose()),
            (*input.accel_bias)[bi] - nav.b_a_hat, (*input.gyro_bias)[bi] - nav.b_g_hat;
        res.nees.push_back(nees_of(e, state().cov));
      }
    }
  } catch (const Error& e) {
    res.failed = true;
    res.failure_kind = e.kind();
    res.failure_message = e.what();
    res.failure_time = t_now;
  }
  return res;
}

SyntheticRun make_synthetic_run(const std::string& name, const sim::TruthStream& truth,
                                const sim::CorruptionSpec& corruption, std::uint64_t seed) {
  SyntheticRun run;
  run.measured = sim::corrupt(truth, corruption, seed);
  run.data.name = name;
  run.data.truth = truth.nav;
  run.data.imu = run.measured.imu;
  run.data.dvl = run.measured.dvl;
  run.data.imu_dt = truth.imu_dt;
  run.data.imu_per_dvl = truth.imu_per_dvl;
  run.accel_bias = run.measured.accel_bias;
  run.gyro_bias = run.measured.gyro_bias;
  run.init = sim::draw_initial_error(corruption, seed);
  return run;
}

}  // namespace anukf::pipeline
