#include "anukf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "anukf/errors.hpp"

namespace anukf::bench {

namespace fs = std::filesystem;
using pipeline::FilterKind;

namespace {

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

TrackSource parse_track(const std::string& token) {
  TrackSource t;
  if (token.rfind("csv:", 0) == 0) {
    t.csv_dir = token.substr(4);
    t.name = fs::path(*t.csv_dir).filename().string();
    if (t.name.empty()) t.name = fs::path(*t.csv_dir).parent_path().filename().string();
    return t;
  }
  const std::string name = token.rfind("roster:", 0) == 0 ? token.substr(7) : token;
  auto spec = sim::roster_track(name);
  if (!spec) throw ConfigError("unknown roster track '" + name + "'");
  t.name = name;
  t.spec = std::move(spec);
  return t;
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& s : sim::training_roster()) train_tracks.push_back(TrackSource{s.name, s, std::nullopt});
  for (const auto& s : sim::test_roster()) test_tracks.push_back(TrackSource{s.name, s, std::nullopt});
}

void ExperimentConfig::validate() const {
  if (mc_runs < 1) throw ConfigError("mc_runs must be at least 1");
  if (filters.empty()) throw ConfigError("no filters selected");
  if (test_tracks.empty()) throw ConfigError("no test tracks configured");
  if (training_realizations < 1) throw ConfigError("training realizations must be at least 1");
  if (training.epochs < 1 || training.batch_size < 1 || !(training.learning_rate > 0.0) ||
      !(training.lr_final_fraction > 0.0) || training.lr_final_fraction > 1.0) {
    throw ConfigError("training needs epochs, batch_size and learning_rate > 0 and lr_final_fraction in (0, 1]");
  }
  if (!(gyro_in_scale > 0.0) || !(gyro_out_scale > 0.0)) throw ConfigError("gyro scales must be positive");
  if (outage && (!(outage->duration >= 0.0) || !(outage->start >= 0.0))) throw ConfigError("outage window must be nonnegative");
  corruption.validate();
  filter.noise.validate();
  filter.adaptive.bounds.validate();
  if (!(filter.dvl_noise_std > 0.0)) throw ConfigError("filter DVL noise must be positive");
}

namespace {

using Tree = boost::property_tree::ptree;

double get_double(const Tree& sec, const std::string& key, const std::string& section) {
  const std::string raw = sec.get<std::string>(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size() || !std::isfinite(v)) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": '" + raw + "' is not a number");
  }
}

long get_int(const Tree& sec, const std::string& key, const std::string& section) {
  const double v = get_double(sec, key, section);
  if (v != std::floor(v)) throw ConfigError("[" + section + "] " + key + " must be an integer");
  return static_cast<long>(v);
}

std::uint64_t get_u64(const Tree& sec, const std::string& key, const std::string& section) {
  const std::string raw = sec.get<std::string>(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc() || res.ptr != raw.data() + raw.size()) {
    throw ConfigError("[" + section + "] " + key + ": '" + raw + "' is not an unsigned integer");
  }
  return v;
}

bool get_bool(const Tree& sec, const std::string& key, const std::string& section) {
  const std::string raw = sec.get<std::string>(key);
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError("[" + section + "] " + key + ": expected true or false");
}

std::array<double, 2> get_pair(const Tree& sec, const std::string& key, const std::string& section) {
  const auto parts = split_list(sec.get<std::string>(key));
  if (parts.size() != 2) throw ConfigError("[" + section + "] " + key + " expects two comma-separated numbers");
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i) {
    try {
      out[i] = std::stod(parts[i]);
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": '" + parts[i] + "' is not a number");
    }
  }
  return out;
}

void check_keys(const Tree& sec, const std::string& section, const std::set<std::string>& allowed) {
  for (const auto& kv : sec) {
    if (!allowed.count(kv.first)) throw ConfigError("[" + section + "] unknown key '" + kv.first + "'");
  }
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  Tree root;
  try {
    boost::property_tree::ini_parser::read_ini(path, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  ExperimentConfig c;

  static const std::set<std::string> sections{"experiment", "tracks", "simulation", "ut",
                                              "adaptive", "filter", "outage", "training"};
  for (const auto& kv : root) {
    if (!sections.count(kv.first)) throw ConfigError("unknown section [" + kv.first + "]");
  }

  if (auto s = root.get_child_optional("experiment")) {
    check_keys(*s, "experiment", {"filters", "mc_runs", "seed", "write_series"});
    if (s->count("filters")) {
      c.filters.clear();
      for (const auto& f : split_list(s->get<std::string>("filters"))) c.filters.push_back(pipeline::parse_filter(f));
    }
    if (s->count("mc_runs")) c.mc_runs = static_cast<int>(get_int(*s, "mc_runs", "experiment"));
    if (s->count("seed")) c.seed = get_u64(*s, "seed", "experiment");
    if (s->count("write_series")) c.write_series = get_bool(*s, "write_series", "experiment");
  }

  if (auto s = root.get_child_optional("tracks")) {
    check_keys(*s, "tracks", {"train", "test"});
    auto load = [&](const std::string& key, std::vector<TrackSource>& dst) {
      if (!s->count(key)) return;
      dst.clear();
      for (const auto& tok : split_list(s->get<std::string>(key))) {
        TrackSource t = parse_track(tok);
        if (t.csv_dir) t.csv_dir = resolve(base, *t.csv_dir);
        dst.push_back(std::move(t));
      }
    };
    load("train", c.train_tracks);
    load("test", c.test_tracks);
  }

  if (auto s = root.get_child_optional("simulation")) {
    const std::string sec = "simulation";
    check_keys(*s, sec, {"accel_noise_std", "gyro_noise_std", "accel_bias_std", "gyro_bias_std", "accel_bias_rw",
                         "gyro_bias_rw", "dvl_noise_std", "init_vel_err_std", "init_misalign_deg", "factor_schedule",
                         "factor_dwell", "factor_min", "factor_max"});
    auto& k = c.corruption;
    auto num = [&](const char* key, double& dst) {
      if (s->count(key)) dst = get_double(*s, key, sec);
    };
    num("accel_noise_std", k.accel_noise_std);
    num("gyro_noise_std", k.gyro_noise_std);
    num("accel_bias_std", k.accel_bias_std);
    num("gyro_bias_std", k.gyro_bias_std);
    num("accel_bias_rw", k.accel_bias_rw);
    num("gyro_bias_rw", k.gyro_bias_rw);
    num("dvl_noise_std", k.dvl_noise_std);
    num("factor_dwell", k.factor_dwell);
    num("factor_min", k.factor_min);
    num("factor_max", k.factor_max);
    if (s->count("init_misalign_deg")) {
      k.init_misalign_std = get_double(*s, "init_misalign_deg", sec) * std::numbers::pi / 180.0;
    }
    if (s->count("init_vel_err_std")) {
      const auto parts = split_list(s->get<std::string>("init_vel_err_std"));
      if (parts.size() != 3) throw ConfigError("[simulation] init_vel_err_std expects three numbers");
      for (int i = 0; i < 3; ++i) k.init_vel_err_std(i) = std::stod(parts[i]);
    }
    if (s->count("factor_schedule")) {
      const auto parts = split_list(s->get<std::string>("factor_schedule"), ':');
      if (parts.empty()) throw ConfigError("[simulation] factor_schedule is empty");
      try {
        if (parts[0] == "random" && parts.size() == 1) {
          k.schedule.reset();
        } else if (parts[0] == "constant" && parts.size() == 2) {
          k.schedule = sim::FactorSchedule::constant(std::stod(parts[1]));
        } else if (parts[0] == "step" && parts.size() == 4) {
          k.schedule = sim::FactorSchedule::step(std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]));
        } else {
          throw ConfigError("");
        }
      } catch (const std::exception&) {
        throw ConfigError("[simulation] factor_schedule must be random, constant:F or step:T:BEFORE:AFTER");
      }
    }
  }

  if (auto s = root.get_child_optional("ut")) {
    check_keys(*s, "ut", {"alpha", "beta", "kappa", "weight_form"});
    double alpha = c.filter.ut.alpha, beta = c.filter.ut.beta, kappa = c.filter.ut.kappa;
    auto form = c.filter.ut.form;
    if (s->count("alpha")) alpha = get_double(*s, "alpha", "ut");
    if (s->count("beta")) beta = get_double(*s, "beta", "ut");
    if (s->count("kappa")) kappa = get_double(*s, "kappa", "ut");
    if (s->count("weight_form")) {
      const auto v = s->get<std::string>("weight_form");
      if (v == "as_printed") {
        form = ukf::CovWeightForm::AsPrinted;
      } else if (v == "canonical") {
        form = ukf::CovWeightForm::Canonical;
      } else {
        throw ConfigError("[ut] weight_form must be as_printed or canonical");
      }
    }
    try {
      c.filter.ut = ukf::UtParams::make(12, alpha, beta, kappa, form);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("[ut] ") + e.what());
    }
  }

  if (auto s = root.get_child_optional("adaptive")) {
    const std::string sec = "adaptive";
    check_keys(*s, sec, {"tau", "tau_a", "tau_g", "clamp_vel", "clamp_psi", "clamp_acc_bias", "clamp_gyro_bias",
                         "accel_weights", "gyro_weights"});
    auto& a = c.filter.adaptive;
    if (s->count("tau")) a.tau.tau = get_double(*s, "tau", sec);
    if (s->count("tau_a")) a.tau.tau_a = get_double(*s, "tau_a", sec);
    if (s->count("tau_g")) a.tau.tau_g = get_double(*s, "tau_g", sec);
    const char* keys[4] = {"clamp_vel", "clamp_psi", "clamp_acc_bias", "clamp_gyro_bias"};
    for (int b = 0; b < 4; ++b) {
      if (!s->count(keys[b])) continue;
      const auto p = get_pair(*s, keys[b], sec);
      a.bounds.lo[b] = p[0];
      a.bounds.hi[b] = p[1];
    }
    if (s->count("accel_weights")) c.accel_weights = resolve(base, s->get<std::string>("accel_weights"));
    if (s->count("gyro_weights")) c.gyro_weights = resolve(base, s->get<std::string>("gyro_weights"));
  }

  if (auto s = root.get_child_optional("filter")) {
    const std::string sec = "filter";
    check_keys(*s, sec, {"sigma_a", "sigma_g", "sigma_ab", "sigma_gb", "dvl_noise_std", "gravity", "q_model"});
    auto& n = c.filter.noise;
    if (s->count("sigma_a")) n.sigma_a = get_double(*s, "sigma_a", sec);
    if (s->count("sigma_g")) n.sigma_g = get_double(*s, "sigma_g", sec);
    if (s->count("sigma_ab")) n.sigma_ab = get_double(*s, "sigma_ab", sec);
    if (s->count("sigma_gb")) n.sigma_gb = get_double(*s, "sigma_gb", sec);
    if (s->count("dvl_noise_std")) c.filter.dvl_noise_std = get_double(*s, "dvl_noise_std", sec);
    if (s->count("gravity")) c.filter.gravity = nav::Vec3(0.0, 0.0, get_double(*s, "gravity", sec));
    if (s->count("q_model")) {
      const auto v = s->get<std::string>("q_model");
      if (v == "static") {
        c.filter.q_model = pipeline::QModel::Static;
      } else if (v == "integrated") {
        c.filter.q_model = pipeline::QModel::Integrated;
      } else {
        throw ConfigError("[filter] q_model must be static or integrated");
      }
    }
  }

  if (auto s = root.get_child_optional("outage")) {
    check_keys(*s, "outage", {"enabled", "start", "duration"});
    const bool enabled = s->count("enabled") ? get_bool(*s, "enabled", "outage") : true;
    if (enabled) {
      Outage o;
      if (s->count("start")) o.start = get_double(*s, "start", "outage");
      if (s->count("duration")) o.duration = get_double(*s, "duration", "outage");
      c.outage = o;
    }
  }

  if (auto s = root.get_child_optional("training")) {
    const std::string sec = "training";
    check_keys(*s, sec, {"epochs", "batch_size", "learning_rate", "lr_final_fraction", "seed", "realizations",
                         "gyro_in_scale", "gyro_out_scale"});
    if (s->count("epochs")) c.training.epochs = static_cast<int>(get_int(*s, "epochs", sec));
    if (s->count("batch_size")) c.training.batch_size = static_cast<int>(get_int(*s, "batch_size", sec));
    if (s->count("learning_rate")) c.training.learning_rate = get_double(*s, "learning_rate", sec);
    if (s->count("lr_final_fraction")) c.training.lr_final_fraction = get_double(*s, "lr_final_fraction", sec);
    if (s->count("seed")) c.training.seed = get_u64(*s, "seed", sec);
    if (s->count("realizations")) c.training_realizations = static_cast<int>(get_int(*s, "realizations", sec));
    if (s->count("gyro_in_scale")) c.gyro_in_scale = get_double(*s, "gyro_in_scale", sec);
    if (s->count("gyro_out_scale")) c.gyro_out_scale = get_double(*s, "gyro_out_scale", sec);
  }

  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::vector<sim::DvlSample> apply_outage(const std::vector<sim::DvlSample>& dvl, double start, double duration,
                                         double track_end) {
  if (!(start >= 0.0) || !(duration >= 0.0) || start + duration > track_end) {
    throw InvalidInput("outage window [" + fmt(start) + ", " + fmt(start + duration) + ") lies outside the track span [0, " +
                       fmt(track_end) + "]");
  }
  std::vector<sim::DvlSample> out = dvl;
  if (duration == 0.0) return out;
  for (auto& d : out) {
    if (d.t >= start && d.t < start + duration) d.valid = false;
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t track, std::size_t run) {
  return sim::mix_seed(sim::mix_seed(base, track), run);
}

unsigned worker_count() {
  if (const char* env = std::getenv("ANUKF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

const TrackFilterSummary& ExperimentResult::row(const std::string& track, FilterKind filter) const {
  for (const auto& r : rows) {
    if (r.track == track && r.filter == filter) return r;
  }
  throw InvalidInput("no result row for " + track + "/" + pipeline::to_string(filter));
}

namespace {

struct PreparedTrack {
  std::string name;
  std::optional<sim::TruthStream> truth;  // synthetic
  std::optional<sim::Dataset> recorded;   // ingested
  double end_time = 0.0;
};

PreparedTrack prepare_track(const TrackSource& src) {
  PreparedTrack p;
  p.name = src.name;
  if (src.spec) {
    p.truth = sim::generate_truth(*src.spec);
    p.end_time = p.truth->nav.back().t;
  } else if (src.csv_dir) {
    p.recorded = sim::dataset_from_ingested(src.name, sim::ingest_csv(*src.csv_dir));
    p.end_time = p.recorded->truth.back().t;
  } else {
    throw ConfigError("track '" + src.name + "' has neither a roster spec nor a CSV directory");
  }
  return p;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto body = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    } catch (...) {
      errors[w] = std::current_exception();
      next = count;
    }
  };
  if (workers <= 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const adaptive::NoiseRegressor* regressor_override) {
  config.validate();
  std::unique_ptr<adaptive::NoiseRegressor> owned;
  const adaptive::NoiseRegressor* regressor = regressor_override;
  const bool any_adaptive =
      std::any_of(config.filters.begin(), config.filters.end(), [](FilterKind k) { return pipeline::is_adaptive(k); });
  if (any_adaptive && !regressor) {
    if (config.accel_weights.empty() || config.gyro_weights.empty()) {
      throw ConfigError("adaptive filters need [adaptive] accel_weights and gyro_weights");
    }
    owned = std::make_unique<adaptive::ProcessNetRegressor>(net::load_weights_file(config.accel_weights),
                                                            net::load_weights_file(config.gyro_weights));
    regressor = owned.get();
  }

  std::vector<PreparedTrack> tracks;
  for (const auto& src : config.test_tracks) tracks.push_back(prepare_track(src));
  if (config.outage) {
    for (const auto& t : tracks) apply_outage({}, config.outage->start, config.outage->duration, t.end_time);
  }

  const std::size_t nt = tracks.size();
  const std::size_t nf = config.filters.size();
  const std::size_t nr = static_cast<std::size_t>(config.mc_runs);

  ExperimentResult result;
  result.runs.assign(nt, std::vector<std::vector<pipeline::RunResult>>(nf, std::vector<pipeline::RunResult>(nr)));
  std::vector<std::vector<std::vector<double>>> runtime(nt, std::vector<std::vector<double>>(nf, std::vector<double>(nr)));
  for (const auto& t : tracks) result.track_names.push_back(t.name);

  parallel_for(nt * nr, [&](std::size_t task) {
    const std::size_t ti = task / nr;
    const std::size_t ri = task % nr;
    const PreparedTrack& track = tracks[ti];
    const std::uint64_t seed = run_seed(config.seed, ti, ri);

    pipeline::SyntheticRun synth;
    pipeline::RunInput input;
    if (track.truth) {
      synth = pipeline::make_synthetic_run(track.name, *track.truth, config.corruption, seed);
      input.accel_bias = &synth.accel_bias;
      input.gyro_bias = &synth.gyro_bias;
    } else {
      synth.data = *track.recorded;
      synth.init = sim::draw_initial_error(config.corruption, seed);
    }
    if (config.outage) {
      synth.data.dvl = apply_outage(synth.data.dvl, config.outage->start, config.outage->duration, track.end_time);
    }
    input.data = &synth.data;
    input.init = synth.init;

    for (std::size_t fi = 0; fi < nf; ++fi) {
      const auto t0 = std::chrono::steady_clock::now();
      result.runs[ti][fi][ri] = pipeline::run_filter(config.filters[fi], input, config.filter, regressor);
      runtime[ti][fi][ri] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  });

  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      TrackFilterSummary row;
      row.track = tracks[ti].name;
      row.filter = config.filters[fi];
      std::vector<metrics::Series> vel, mis;
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const auto& r = result.runs[ti][fi][ri];
        row.runtime_s += runtime[ti][fi][ri];
        row.clamp_events += r.clamp_events;
        if (r.failed) {
          ++row.failed;
          result.failures.push_back({row.track, row.filter, static_cast<int>(ri), r.failure_kind, r.failure_message,
                                     r.failure_time});
          continue;
        }
        ++row.runs;
        vel.push_back(r.vel_err);
        mis.push_back(r.misalign);
      }
      if (!vel.empty()) {
        row.vrmse = metrics::vrmse(vel).value;
        row.mrmse = metrics::mrmse(mis).value;
      } else {
        row.vrmse = row.mrmse = std::numeric_limits<double>::quiet_NaN();
      }
      result.rows.push_back(row);
    }
  }

  if (nt >= 2) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      TrackFilterSummary avg;
      avg.track = "average";
      avg.filter = config.filters[fi];
      double sv = 0.0, sm = 0.0;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto& r = result.rows[ti * nf + fi];
        avg.runs += r.runs;
        avg.failed += r.failed;
        avg.clamp_events += r.clamp_events;
        avg.runtime_s += r.runtime_s;
        sv += r.vrmse * r.vrmse;
        sm += r.mrmse * r.mrmse;
      }
      if (nt == 2) {
        avg.vrmse = metrics::track_average(result.rows[fi].vrmse, result.rows[nf + fi].vrmse);
        avg.mrmse = metrics::track_average(result.rows[fi].mrmse, result.rows[nf + fi].mrmse);
      } else {
        avg.vrmse = std::sqrt(sv / static_cast<double>(nt));
        avg.mrmse = std::sqrt(sm / static_cast<double>(nt));
      }
      result.rows.push_back(avg);
    }
  }
  return result;
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    std::ofstream out(dir / "metrics.csv");
    out << "track,filter,runs,failed,vrmse_mps,mrmse_rad,clamp_events\n";
    for (const auto& r : result.rows) {
      out << r.track << ',' << pipeline::to_string(r.filter) << ',' << r.runs << ',' << r.failed << ',' << fmt(r.vrmse)
          << ',' << fmt(r.mrmse) << ',' << r.clamp_events << '\n';
    }
  }
  {
    std::ofstream out(dir / "timing.csv");
    out << "track,filter,runtime_s\n";
    for (const auto& r : result.rows) out << r.track << ',' << pipeline::to_string(r.filter) << ',' << fmt(r.runtime_s) << '\n';
  }
  {
    std::ofstream out(dir / "failures.csv");
    out << "track,filter,run,kind,time_s,message\n";
    for (const auto& f : result.failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << f.track << ',' << pipeline::to_string(f.filter) << ',' << f.run << ',' << f.kind << ',' << fmt(f.time)
          << ',' << msg << '\n';
    }
  }
  if (!config.write_series) return;
  for (std::size_t ti = 0; ti < result.runs.size(); ++ti) {
    for (std::size_t fi = 0; fi < result.runs[ti].size(); ++fi) {
      const std::string stem = result.track_names[ti] + "_" + pipeline::to_string(config.filters[fi]);
      const auto& runs = result.runs[ti][fi];
      std::ofstream series(dir / ("series_" + stem + ".csv"));
      series << "run,t,dv_n,dv_e,dv_d,dyaw,dpitch,droll\n";
      std::size_t steps = 0;
      for (std::size_t ri = 0; ri < runs.size(); ++ri) {
        const auto& r = runs[ri];
        if (r.failed) continue;
        steps = r.t.size();
        for (std::size_t j = 0; j < r.t.size(); ++j) {
          series << ri << ',' << fmt(r.t[j]);
          for (int a = 0; a < 3; ++a) series << ',' << fmt(r.vel_err[j](a));
          for (int a = 0; a < 3; ++a) series << ',' << fmt(r.misalign[j](a));
          series << '\n';
        }
      }
      std::ofstream plot(dir / ("plot_" + stem + ".csv"));
      plot << "t,mean_dv_norm,std_dv_norm\n";
      for (std::size_t j = 0; j < steps; ++j) {
        std::vector<double> norms;
        double t = 0.0;
        for (const auto& r : runs) {
          if (r.failed) continue;
          norms.push_back(r.vel_err[j].norm());
          t = r.t[j];
        }
        const double n = static_cast<double>(norms.size());
        const double mean = metrics::pairwise_sum(norms) / n;
        std::vector<double> dev;
        for (double v : norms) dev.push_back((v - mean) * (v - mean));
        const double sd = norms.size() > 1 ? std::sqrt(metrics::pairwise_sum(dev) / (n - 1.0)) : 0.0;
        plot << fmt(t) << ',' << fmt(mean) << ',' << fmt(sd) << '\n';
      }
    }
  }
}

void build_training_sets(const ExperimentConfig& config, std::vector<net::TrainSample>& accel,
                         std::vector<net::TrainSample>& gyro) {
  accel.clear();
  gyro.clear();
  for (std::size_t ti = 0; ti < config.train_tracks.size(); ++ti) {
    const auto& src = config.train_tracks[ti];
    if (!src.spec) throw ConfigError("training track '" + src.name + "' must be synthetic (labels are required)");
    const sim::TruthStream truth = sim::generate_truth(*src.spec);
    for (int r = 0; r < config.training_realizations; ++r) {
      const std::uint64_t seed = sim::mix_seed(sim::mix_seed(config.seed, 1000 + ti), static_cast<std::uint64_t>(r));
      const sim::MeasuredStreams m = sim::corrupt(truth, config.corruption, seed);
      auto a = sim::accel_training_set(m, truth.imu_per_dvl);
      auto g = sim::gyro_training_set(m, truth.imu_per_dvl);
      accel.insert(accel.end(), a.begin(), a.end());
      gyro.insert(gyro.end(), g.begin(), g.end());
    }
  }
  if (accel.empty()) throw ConfigError("no training tracks configured");
}

TrainOutcome train_networks(const ExperimentConfig& config) {
  config.validate();
  TrainOutcome out;
  build_training_sets(config, out.accel_set, out.gyro_set);
  out.accel = net::ProcessNetModel::initialized(config.training.seed, 1.0, 1.0);
  out.gyro = net::ProcessNetModel::initialized(sim::mix_seed(config.training.seed, 1), config.gyro_in_scale,
                                               config.gyro_out_scale);
  std::exception_ptr err;
  std::thread gyro_thread;
  const bool split = worker_count() > 1;
  if (split) {
    gyro_thread = std::thread([&] {
      try {
        out.gyro_report = net::train(out.gyro, out.gyro_set, config.training);
      } catch (...) {
        err = std::current_exception();
      }
    });
  }
  out.accel_report = net::train(out.accel, out.accel_set, config.training);
  if (split) {
    gyro_thread.join();
    if (err) std::rethrow_exception(err);
  } else {
    out.gyro_report = net::train(out.gyro, out.gyro_set, config.training);
  }
  return out;
}

void train_command(const ExperimentConfig& config, const std::string& out_dir) {
  const TrainOutcome t = train_networks(config);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  net::save_weights_file(t.accel, (dir / "accel_net.json").string());
  net::save_weights_file(t.gyro, (dir / "gyro_net.json").string());
  std::ofstream loss(dir / "loss.csv");
  loss << "epoch,accel_loss,gyro_loss\n";
  loss << 0 << ',' << fmt(t.accel_report.initial_loss) << ',' << fmt(t.gyro_report.initial_loss) << '\n';
  for (std::size_t e = 0; e < t.accel_report.epoch_loss.size(); ++e) {
    loss << e + 1 << ',' << fmt(t.accel_report.epoch_loss[e]) << ',' << fmt(t.gyro_report.epoch_loss[e]) << '\n';
  }
  loss << "final," << fmt(t.accel_report.final_loss) << ',' << fmt(t.gyro_report.final_loss) << '\n';
}

void simulate_command(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  std::vector<TrackSource> all = config.train_tracks;
  all.insert(all.end(), config.test_tracks.begin(), config.test_tracks.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].spec) continue;
    const sim::TruthStream truth = sim::generate_truth(*all[i].spec);
    const sim::MeasuredStreams m = sim::corrupt(truth, config.corruption, run_seed(config.seed, i, 0));
    const fs::path dir = fs::path(out_dir) / all[i].name;
    sim::write_csv(dir.string(), m.imu, m.dvl, &truth.nav);
    sim::write_labels_csv((dir / "labels.csv").string(), m.labels);
  }
}

}  // namespace anukf::bench
