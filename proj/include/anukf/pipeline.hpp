#pragma once

#include <string>
#include <vector>

#include "anukf/adaptive_q.hpp"
#include "anukf/insdvl.hpp"
#include "anukf/metrics.hpp"
#include "anukf/simkit.hpp"
#include "anukf/ukf.hpp"

namespace anukf::pipeline {

/// ukf: fixed-Q unscented filter; anekf: EKF with the learned Q; anukf:
/// unscented filter with the learned Q.
enum class FilterKind { Ukf, Anekf, Anukf };

std::string to_string(FilterKind kind);
FilterKind parse_filter(const std::string& name);
inline bool is_adaptive(FilterKind k) { return k != FilterKind::Ukf; }

/// Fixed-Q construction for the non-adaptive filter. `Static` is G·Q*·Gᵀ at the
/// end of the interval. `Integrated` sums per-IMU-step noise through the
/// transition matrices, which adds the bias-to-velocity coupling that builds
/// up inside the interval; it matches the simulator's noise exactly.
enum class QModel { Static, Integrated };

struct FilterConfig {
  ukf::UtParams ut = ukf::UtParams::make(12);
  QModel q_model = QModel::Static;
  insdvl::NoiseSpec noise;       ///< static model, also the clamp fallback
  double dvl_noise_std = 0.02;   ///< R = σ²·I
  insdvl::Vector12 p0_std;       ///< initial error STD
  adaptive::AdaptiveQConfig adaptive;
  nav::Vec3 gravity = nav::default_gravity();

  FilterConfig();
};

/// A dataset with its true sensor biases, when known (synthetic data).
struct RunInput {
  const sim::Dataset* data = nullptr;
  const std::vector<nav::Vec3>* accel_bias = nullptr;
  const std::vector<nav::Vec3>* gyro_bias = nullptr;
  sim::InitialError init;
};

struct RunResult {
  std::vector<double> t;            ///< epoch times
  metrics::Series vel_err;          ///< v_est − v_true per epoch
  metrics::Series misalign;         ///< (yaw, pitch, roll) per epoch
  std::vector<double> nees;         ///< empty when true biases are unknown
  std::vector<bool> updated;        ///< DVL update applied at the epoch
  int clamp_events = 0;
  int replaced_nonfinite = 0;
  int gimbal_flags = 0;
  bool failed = false;
  std::string failure_kind;
  std::string failure_message;
  double failure_time = 0.0;
};

/// Runs one filter over a dataset at the DVL cadence, mechanizing at the IMU
/// rate in between. Adaptive kinds require a regressor.
RunResult run_filter(FilterKind kind, const RunInput& input, const FilterConfig& config,
                     const adaptive::NoiseRegressor* regressor);

/// Dataset plus true biases for a synthetic track realization.
struct SyntheticRun {
  sim::Dataset data;
  std::vector<nav::Vec3> accel_bias;
  std::vector<nav::Vec3> gyro_bias;
  sim::InitialError init;
  sim::MeasuredStreams measured;
};

SyntheticRun make_synthetic_run(const std::string& name, const sim::TruthStream& truth,
                                const sim::CorruptionSpec& corruption, std::uint64_t seed);

}  // namespace anukf::pipeline
