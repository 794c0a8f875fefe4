#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "anukf/processnet.hpp"
#include "anukf/strapdown.hpp"

namespace anukf::sim {

using nav::Mat3;
using nav::NavState;
using nav::Vec3;

/// Constant yaw rate with a linear ramp to the end speeds. Speeds are along the
/// body x axis (forward) and along the navigation down axis.
struct Segment {
  double duration = 0.0;     ///< s
  double yaw_rate = 0.0;     ///< rad/s
  double speed_end = 2.0;    ///< m/s, forward
  double down_speed_end = 0.0;  ///< m/s
};

struct TrajectorySpec {
  std::string name;
  std::vector<Segment> segments;
  double initial_speed = 2.0;
  double initial_down_speed = 0.0;
  double initial_yaw = 0.0;
  double imu_rate = 100.0;
  double dvl_rate = 1.0;
  std::uint64_t seed = 0;

  double duration() const;
  /// Rejects non-positive rates and segments that do not tile the IMU grid.
  void validate() const;
};

struct DvlSample {
  double t = 0.0;
  Vec3 v_b = Vec3::Zero();
  bool valid = true;
};

/// Truth at the IMU rate: `nav[k]` at t = k·dt (k = 0..N), `imu[k]` drives
/// nav[k] → nav[k+1] and carries t = (k+1)·dt. DVL epochs are every
/// `imu_per_dvl` IMU steps starting with the first full interval.
struct TruthStream {
  std::vector<NavState> nav;
  std::vector<nav::ImuSample> imu;
  std::vector<DvlSample> dvl;
  double imu_dt = 0.01;
  int imu_per_dvl = 100;
};

TruthStream generate_truth(const TrajectorySpec& spec, const Vec3& gravity_n = nav::default_gravity());

/// Four training and two test tracks of 240 s with mixed maneuvers.
std::vector<TrajectorySpec> training_roster();
std::vector<TrajectorySpec> test_roster();
std::optional<TrajectorySpec> roster_track(const std::string& name);

/// Piecewise-constant per-axis multipliers applied to the white-noise STD and
/// to the bias random-walk intensity.
struct FactorSchedule {
  std::vector<double> change_times;  ///< ascending, first entry 0
  std::vector<Vec3> accel;
  std::vector<Vec3> gyro;

  static FactorSchedule constant(double factor);
  /// Per axis and sensor, uniform in [lo, hi], redrawn every `dwell` seconds.
  static FactorSchedule random(double duration, double dwell, double lo, double hi, std::uint64_t seed);
  /// `before` until `at`, `after` from then on, same on every axis and sensor.
  static FactorSchedule step(double at, double before, double after);

  Vec3 accel_at(double t) const;
  Vec3 gyro_at(double t) const;
  void validate() const;
};

struct CorruptionSpec {
  double accel_noise_std = 0.03;      ///< m/s²
  double gyro_noise_std = 7.3e-6;     ///< rad/s
  double accel_bias_std = 0.3;        ///< m/s², initial bias
  double gyro_bias_std = 7.3e-5;      ///< rad/s, initial bias
  double accel_bias_rw = 0.003;       ///< m/s² /√s
  double gyro_bias_rw = 7.3e-7;       ///< rad/s /√s
  double dvl_noise_std = 0.02;        ///< m/s
  Vec3 init_vel_err_std{0.25, 0.25, 0.05};          ///< m/s
  double init_misalign_std = 0.01 * 3.14159265358979323846 / 180.0;  ///< rad per axis

  /// Unset means a seeded random schedule with `factor_dwell` and
  /// [factor_min, factor_max]; set means exactly this schedule.
  std::optional<FactorSchedule> schedule;
  double factor_dwell = 30.0;
  double factor_min = 1.0;
  double factor_max = 6.0;

  void validate() const;
  static CorruptionSpec noiseless();
};

/// True per-axis noise variance in effect over one DVL interval.
struct WindowLabel {
  double t_start = 0.0;
  Vec3 accel_var = Vec3::Zero();
  Vec3 gyro_var = Vec3::Zero();
};

struct MeasuredStreams {
  std::vector<nav::ImuSample> imu;
  std::vector<DvlSample> dvl;
  std::vector<WindowLabel> labels;
  std::vector<Vec3> accel_bias;  ///< true bias per IMU sample
  std::vector<Vec3> gyro_bias;
  FactorSchedule schedule;
};

MeasuredStreams corrupt(const TruthStream& truth, const CorruptionSpec& spec, std::uint64_t seed);

/// Initial navigation error: estimate = truth corrupted by δv and δΨ with
/// δv = v_true − v_est and C_est = R(δΨ)·C_true. Biases start at zero.
struct InitialError {
  Vec3 dv = Vec3::Zero();
  Vec3 dpsi = Vec3::Zero();
};
InitialError draw_initial_error(const CorruptionSpec& spec, std::uint64_t seed);
NavState apply_initial_error(const NavState& truth, const InitialError& err);

/// Windows of the trailing IMU samples for DVL interval `epoch` (1-based).
net::ImuWindow accel_window(const std::vector<nav::ImuSample>& imu, int epoch, int imu_per_dvl);
net::ImuWindow gyro_window(const std::vector<nav::ImuSample>& imu, int epoch, int imu_per_dvl);

/// Training pairs for one corrupted stream.
std::vector<net::TrainSample> accel_training_set(const MeasuredStreams& m, int imu_per_dvl);
std::vector<net::TrainSample> gyro_training_set(const MeasuredStreams& m, int imu_per_dvl);

/// A measured dataset with truth, as consumed by the filters.
struct Dataset {
  std::string name;
  std::vector<NavState> truth;  ///< IMU-rate truth including the initial state
  std::vector<nav::ImuSample> imu;
  std::vector<DvlSample> dvl;
  double imu_dt = 0.01;
  int imu_per_dvl = 100;
};

/// Reads imu.csv, dvl.csv and, if present, truth.csv from a directory.
/// truth.csv holds one row per IMU sample plus the initial state.
struct Ingested {
  std::vector<nav::ImuSample> imu;
  std::vector<DvlSample> dvl;
  std::optional<std::vector<NavState>> truth;
  double imu_dt = 0.0;
};
Ingested ingest_csv(const std::string& dir);

void write_csv(const std::string& dir, const std::vector<nav::ImuSample>& imu, const std::vector<DvlSample>& dvl,
               const std::vector<NavState>* truth);
void write_labels_csv(const std::string& path, const std::vector<WindowLabel>& labels);

/// Builds a filter-ready dataset from ingested tables. Requires truth and a
/// DVL cadence that is a whole number of IMU samples.
Dataset dataset_from_ingested(const std::string& name, const Ingested& in);

/// Splits a seed into independent substreams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::mt19937_64 make_rng(std::uint64_t seed);

}  // namespace anukf::sim
