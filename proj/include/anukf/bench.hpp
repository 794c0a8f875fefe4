#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anukf/pipeline.hpp"
#include "anukf/processnet.hpp"
#include "anukf/simkit.hpp"

namespace anukf::bench {

/// A roster track by name or a directory of CSV tables.
struct TrackSource {
  std::string name;
  std::optional<sim::TrajectorySpec> spec;
  std::optional<std::string> csv_dir;
};

TrackSource parse_track(const std::string& token);

struct Outage {
  double start = 180.0;
  double duration = 20.0;
};

struct ExperimentConfig {
  std::vector<pipeline::FilterKind> filters{pipeline::FilterKind::Ukf, pipeline::FilterKind::Anekf,
                                            pipeline::FilterKind::Anukf};
  int mc_runs = 20;
  std::uint64_t seed = 20240901;
  std::vector<TrackSource> train_tracks;
  std::vector<TrackSource> test_tracks;
  sim::CorruptionSpec corruption;
  pipeline::FilterConfig filter;
  std::optional<Outage> outage;
  std::string accel_weights;
  std::string gyro_weights;
  net::TrainConfig training;
  int training_realizations = 4;
  double gyro_in_scale = 1e4;
  double gyro_out_scale = 1e-8;
  bool write_series = true;

  ExperimentConfig();
  void validate() const;
};

/// Reads the INI-style experiment file. Relative paths inside it resolve
/// against the file's directory.
ExperimentConfig load_config(const std::string& path);

/// Marks DVL epochs with start ≤ t < start + duration as unusable.
std::vector<sim::DvlSample> apply_outage(const std::vector<sim::DvlSample>& dvl, double start, double duration,
                                         double track_end);

std::uint64_t run_seed(std::uint64_t base, std::size_t track, std::size_t run);

/// Worker count from ANUKF_THREADS, else the hardware concurrency.
unsigned worker_count();

struct TrackFilterSummary {
  std::string track;
  pipeline::FilterKind filter{};
  int runs = 0;
  int failed = 0;
  double vrmse = 0.0;
  double mrmse = 0.0;
  long clamp_events = 0;
  double runtime_s = 0.0;
};

struct FailureRecord {
  std::string track;
  pipeline::FilterKind filter{};
  int run = 0;
  std::string kind;
  std::string message;
  double time = 0.0;
};

struct ExperimentResult {
  std::vector<TrackFilterSummary> rows;  ///< per track then filter, plus "average" rows
  std::vector<FailureRecord> failures;
  /// results[track][filter][run]
  std::vector<std::vector<std::vector<pipeline::RunResult>>> runs;
  std::vector<std::string> track_names;

  const TrackFilterSummary& row(const std::string& track, pipeline::FilterKind filter) const;
};

/// Runs every (track, run) task on a worker pool; all filters of a task see the
/// same corrupted streams. `regressor_override` replaces the weight files.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const adaptive::NoiseRegressor* regressor_override = nullptr);

void write_outputs(const ExperimentResult& result, const ExperimentConfig& config, const std::string& out_dir);

struct TrainOutcome {
  net::ProcessNetModel accel;
  net::ProcessNetModel gyro;
  net::TrainReport accel_report;
  net::TrainReport gyro_report;
  std::vector<net::TrainSample> accel_set;
  std::vector<net::TrainSample> gyro_set;
};

/// Training sets from the configured training tracks.
void build_training_sets(const ExperimentConfig& config, std::vector<net::TrainSample>& accel,
                         std::vector<net::TrainSample>& gyro);

TrainOutcome train_networks(const ExperimentConfig& config);
void train_command(const ExperimentConfig& config, const std::string& out_dir);
void simulate_command(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace anukf::bench
