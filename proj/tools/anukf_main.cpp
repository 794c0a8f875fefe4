#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "anukf/bench.hpp"
#include "anukf/errors.hpp"

namespace {

int report_error(const std::string& kind, const std::string& message) {
  nlohmann::json err{{"error", message}, {"kind", kind}};
  std::cerr << err.dump() << std::endl;
  return 2;
}

std::vector<std::string> split_filters(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace anukf;
  CLI::App app{"INS/DVL fusion with learned process noise: simulate, train and benchmark filters"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* simulate = app.add_subcommand("simulate", "Write synthetic sensor streams and labels as CSV");
  simulate->add_option("--config", config_path, "Experiment config file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train the accelerometer and gyroscope noise networks");
  train->add_option("--config", config_path, "Experiment config file")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  std::string filters;
  int mc_runs = 0;
  double outage_start = -1.0;
  double outage_duration = -1.0;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Monte Carlo comparison of the filters");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* filters_opt = run->add_option("--filters", filters, "Comma-separated subset of ukf,anekf,anukf");
  auto* runs_opt = run->add_option("--mc-runs", mc_runs, "Monte Carlo runs per track")->check(CLI::PositiveNumber);
  auto* start_opt = run->add_option("--outage-start", outage_start, "DVL outage start (s)");
  auto* dur_opt = run->add_option("--outage-duration", outage_duration, "DVL outage duration (s)");
  auto* seed_opt = run->add_option("--seed", seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what());
  }

  try {
    bench::ExperimentConfig config = bench::load_config(config_path);
    if (*simulate) {
      bench::simulate_command(config, out_dir);
    } else if (*train) {
      bench::train_command(config, out_dir);
    } else if (*run) {
      if (*filters_opt) {
        config.filters.clear();
        for (const auto& f : split_filters(filters)) config.filters.push_back(pipeline::parse_filter(f));
      }
      if (*runs_opt) config.mc_runs = mc_runs;
      if (*seed_opt) config.seed = seed;
      if (*start_opt || *dur_opt) {
        bench::Outage o = config.outage.value_or(bench::Outage{});
        if (*start_opt) o.start = outage_start;
        if (*dur_opt) o.duration = outage_duration;
        config.outage = o;
      }
      const auto result = bench::run_experiment(config);
      bench::write_outputs(result, config, out_dir);
      for (const auto& r : result.rows) {
        std::cout << r.track << ' ' << pipeline::to_string(r.filter) << " vrmse=" << r.vrmse << " m/s mrmse=" << r.mrmse
                  << " rad failed=" << r.failed << '\n';
      }
    }
  } catch (const Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return EXIT_SUCCESS;
}
