#include "anukf/simkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anukf/errors.hpp"

namespace anukf::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

int steps_in(double duration, double rate) {
  const double exact = duration * rate;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 || rounded < 1.0) return -1;
  return static_cast<int>(rounded);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

double TrajectorySpec::duration() const {
  double d = 0.0;
  for (const auto& s : segments) d += s.duration;
  return d;
}

void TrajectorySpec::validate() const {
  if (!(imu_rate > 0.0) || !(dvl_rate > 0.0)) throw InvalidInput("trajectory rates must be positive");
  if (segments.empty()) throw InvalidInput("trajectory '" + name + "' has no segments");
  if (steps_in(1.0 / dvl_rate, imu_rate) < 1) throw InvalidInput("DVL period must be a whole number of IMU steps");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.duration > 0.0) || steps_in(s.duration, imu_rate) < 1) {
      throw InvalidInput("segment " + std::to_string(i) + " of '" + name + "' does not tile the IMU grid");
    }
    if (!std::isfinite(s.yaw_rate) || !(s.speed_end >= 0.0) || !std::isfinite(s.down_speed_end)) {
      throw InvalidInput("segment " + std::to_string(i) + " of '" + name + "' has invalid kinematics");
    }
  }
  if (steps_in(duration(), dvl_rate) < 1) throw InvalidInput("track duration is not a whole number of DVL periods");
}

TruthStream generate_truth(const TrajectorySpec& spec, const Vec3& gravity_n) {
  spec.validate();
  TruthStream out;
  out.imu_dt = 1.0 / spec.imu_rate;
  out.imu_per_dvl = steps_in(1.0 / spec.dvl_rate, spec.imu_rate);
  const double dt = out.imu_dt;

  NavState cur;
  cur.c_bn = nav::dcm_from_euler(spec.initial_yaw, 0.0, 0.0);
  cur.v_n = spec.initial_speed * cur.c_bn.col(0) + Vec3(0.0, 0.0, spec.initial_down_speed);
  out.nav.push_back(cur);

  double speed = spec.initial_speed;
  double down = spec.initial_down_speed;
  long k = 0;
  for (const Segment& seg : spec.segments) {
    const int n = steps_in(seg.duration, spec.imu_rate);
    const double s0 = speed;
    const double d0 = down;
    const Vec3 w(0.0, 0.0, seg.yaw_rate);
    for (int i = 1; i <= n; ++i) {
      const double frac = static_cast<double>(i) / n;
      NavState next;
      next.c_bn = nav::orthonormalize(cur.c_bn * nav::rodrigues(w * dt));
      next.v_n = (s0 + (seg.speed_end - s0) * frac) * next.c_bn.col(0) +
                 Vec3(0.0, 0.0, d0 + (seg.down_speed_end - d0) * frac);
      next.t = static_cast<double>(++k) * dt;

      nav::ImuSample imu;
      imu.w_b = w;
      imu.f_b = cur.c_bn.transpose() * ((next.v_n - cur.v_n) / dt - gravity_n);
      imu.t = next.t;
      out.imu.push_back(imu);
      out.nav.push_back(next);
      cur = next;
    }
    speed = seg.speed_end;
    down = seg.down_speed_end;
  }

  for (std::size_t idx = static_cast<std::size_t>(out.imu_per_dvl); idx < out.nav.size();
       idx += static_cast<std::size_t>(out.imu_per_dvl)) {
    DvlSample d;
    d.t = out.nav[idx].t;
    d.v_b = out.nav[idx].c_bn.transpose() * out.nav[idx].v_n;
    out.dvl.push_back(d);
  }
  return out;
}

namespace {

Segment seg(double duration, double yaw_rate_deg, double speed_end, double down_end = 0.0) {
  return Segment{duration, yaw_rate_deg * kDeg, speed_end, down_end};
}

TrajectorySpec make_track(std::string name, std::uint64_t seed, double yaw0_deg, double speed0,
                          std::vector<Segment> segments) {
  TrajectorySpec t;
  t.name = std::move(name);
  t.seed = seed;
  t.initial_yaw = yaw0_deg * kDeg;
  t.initial_speed = speed0;
  t.segments = std::move(segments);
  return t;
}

}  // namespace

std::vector<TrajectorySpec> training_roster() {
  std::vector<TrajectorySpec> r;
  r.push_back(make_track("train1", 101, 0.0, 2.0,
                         {seg(40, 0, 2.0), seg(30, 3, 2.0), seg(50, 0, 2.5), seg(40, -2, 2.5), seg(40, 0, 1.8),
                          seg(20, 4, 1.8), seg(20, 0, 1.8)}));
  r.push_back(make_track("train2", 102, 45.0, 1.5,
                         {seg(50, 0, 1.5), seg(60, 3, 1.5), seg(50, 0, 1.5), seg(60, -3, 1.5), seg(20, 0, 2.0)}));
  r.push_back(make_track("train3", 103, -30.0, 2.2,
                         {seg(30, 0, 2.2, 0.3), seg(45, 2, 2.2, 0.3), seg(45, 0, 2.0, -0.2), seg(60, -1.5, 2.0, -0.2),
                          seg(60, 0, 1.5, 0.0)}));
  std::vector<Segment> zigzag;
  for (int i = 0; i < 12; ++i) {
    const double rate = (i % 2 == 0) ? 0.0 : ((i / 2) % 2 == 0 ? 5.0 : -5.0);
    zigzag.push_back(seg(20, rate, 1.6 + 0.1 * (i % 4)));
  }
  r.push_back(make_track("train4", 104, 120.0, 1.6, zigzag));
  return r;
}

std::vector<TrajectorySpec> test_roster() {
  std::vector<TrajectorySpec> r;
  r.push_back(make_track("track5", 105, 10.0, 2.0,
                         {seg(30, 0, 2.0), seg(30, 3, 2.0), seg(40, 0, 2.4, 0.2), seg(30, -3, 2.4, 0.2),
                          seg(50, 0, 2.0, 0.0), seg(20, 4.5, 2.0), seg(40, 0, 1.7)}));
  r.push_back(make_track("track6", 106, -60.0, 1.8,
                         {seg(20, 0, 1.8), seg(40, -2.25, 1.8), seg(30, 0, 2.2), seg(45, 2, 2.2, -0.25),
                          seg(35, 0, 2.2, 0.0), seg(30, -3, 1.6), seg(40, 0, 1.6)}));
  return r;
}

std::optional<TrajectorySpec> roster_track(const std::string& name) {
  for (auto& list : {training_roster(), test_roster()}) {
    for (const auto& t : list) {
      if (t.name == name) return t;
    }
  }
  return std::nullopt;
}

FactorSchedule FactorSchedule::constant(double factor) {
  FactorSchedule s;
  s.change_times = {0.0};
  s.accel = {Vec3::Constant(factor)};
  s.gyro = {Vec3::Constant(factor)};
  return s;
}

FactorSchedule FactorSchedule::random(double duration, double dwell, double lo, double hi, std::uint64_t seed) {
  if (!(dwell > 0.0) || !(duration > 0.0) || !(lo <= hi)) throw InvalidInput("invalid factor schedule parameters");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  FactorSchedule s;
  for (double t = 0.0; t < duration; t += dwell) {
    s.change_times.push_back(t);
    Vec3 a, g;
    for (int i = 0; i < 3; ++i) a(i) = u(rng);
    for (int i = 0; i < 3; ++i) g(i) = u(rng);
    s.accel.push_back(a);
    s.gyro.push_back(g);
  }
  return s;
}

FactorSchedule FactorSchedule::step(double at, double before, double after) {
  FactorSchedule s;
  s.change_times = {0.0, at};
  s.accel = {Vec3::Constant(before), Vec3::Constant(after)};
  s.gyro = s.accel;
  return s;
}

namespace {

std::size_t schedule_index(const std::vector<double>& times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
}

}  // namespace

Vec3 FactorSchedule::accel_at(double t) const { return accel[schedule_index(change_times, t)]; }
Vec3 FactorSchedule::gyro_at(double t) const { return gyro[schedule_index(change_times, t)]; }

void FactorSchedule::validate() const {
  if (change_times.empty() || change_times.size() != accel.size() || change_times.size() != gyro.size()) {
    throw InvalidInput("factor schedule tables have inconsistent lengths");
  }
  if (change_times.front() != 0.0 || !std::is_sorted(change_times.begin(), change_times.end())) {
    throw InvalidInput("factor schedule change times must start at 0 and ascend");
  }
  for (std::size_t i = 0; i < accel.size(); ++i) {
    if ((accel[i].array() < 1.0).any() || (accel[i].array() > 6.0).any() || (gyro[i].array() < 1.0).any() ||
        (gyro[i].array() > 6.0).any()) {
      throw InvalidInput("factor schedule values must lie in [1, 6]");
    }
  }
}

void CorruptionSpec::validate() const {
  for (double s : {accel_noise_std, gyro_noise_std, accel_bias_std, gyro_bias_std, accel_bias_rw, gyro_bias_rw,
                   dvl_noise_std, init_misalign_std}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("corruption STDs must be nonnegative");
  }
  if ((init_vel_err_std.array() < 0.0).any()) throw InvalidInput("corruption STDs must be nonnegative");
  if (schedule) schedule->validate();
  if (!(factor_min >= 1.0) || !(factor_max <= 6.0) || !(factor_min <= factor_max) || !(factor_dwell > 0.0)) {
    throw InvalidInput("factor range must lie in [1, 6] with a positive dwell");
  }
}

CorruptionSpec CorruptionSpec::noiseless() {
  CorruptionSpec s;
  s.accel_noise_std = s.gyro_noise_std = s.accel_bias_std = s.gyro_bias_std = 0.0;
  s.accel_bias_rw = s.gyro_bias_rw = s.dvl_noise_std = 0.0;
  s.init_vel_err_std.setZero();
  s.init_misalign_std = 0.0;
  s.schedule = FactorSchedule::constant(1.0);
  return s;
}

MeasuredStreams corrupt(const TruthStream& truth, const CorruptionSpec& spec, std::uint64_t seed) {
  spec.validate();
  MeasuredStreams m;
  const double dt = truth.imu_dt;
  const double duration = static_cast<double>(truth.imu.size()) * dt;
  m.schedule = spec.schedule ? *spec.schedule
                             : FactorSchedule::random(duration, spec.factor_dwell, spec.factor_min, spec.factor_max,
                                                      mix_seed(seed, 4));

  auto noise_rng = make_rng(mix_seed(seed, 1));
  auto bias_rng = make_rng(mix_seed(seed, 2));
  auto dvl_rng = make_rng(mix_seed(seed, 3));
  std::normal_distribution<double> n01(0.0, 1.0);
  auto draw3 = [&](std::mt19937_64& rng) { return Vec3(n01(rng), n01(rng), n01(rng)); };

  Vec3 ba = spec.accel_bias_std * draw3(bias_rng);
  Vec3 bg = spec.gyro_bias_std * draw3(bias_rng);
  const double sqrt_dt = std::sqrt(dt);

  m.imu.reserve(truth.imu.size());
  m.accel_bias.reserve(truth.imu.size());
  m.gyro_bias.reserve(truth.imu.size());
  for (const auto& s : truth.imu) {
    const double mid = s.t - 0.5 * dt;
    const Vec3 fa = m.schedule.accel_at(mid);
    const Vec3 fg = m.schedule.gyro_at(mid);
    nav::ImuSample out = s;
    out.f_b = s.f_b + ba + spec.accel_noise_std * fa.cwiseProduct(draw3(noise_rng));
    out.w_b = s.w_b + bg + spec.gyro_noise_std * fg.cwiseProduct(draw3(noise_rng));
    m.imu.push_back(out);
    m.accel_bias.push_back(ba);
    m.gyro_bias.push_back(bg);
    ba += spec.accel_bias_rw * sqrt_dt * fa.cwiseProduct(draw3(bias_rng));
    bg += spec.gyro_bias_rw * sqrt_dt * fg.cwiseProduct(draw3(bias_rng));
  }

  m.dvl = truth.dvl;
  for (auto& d : m.dvl) d.v_b += spec.dvl_noise_std * draw3(dvl_rng);

  const int per = truth.imu_per_dvl;
  const std::size_t windows = truth.imu.size() / static_cast<std::size_t>(per);
  for (std::size_t w = 0; w < windows; ++w) {
    WindowLabel label;
    label.t_start = static_cast<double>(w * per) * dt;
    for (int i = 0; i < per; ++i) {
      const double mid = truth.imu[w * per + i].t - 0.5 * dt;
      const Vec3 a = spec.accel_noise_std * m.schedule.accel_at(mid);
      const Vec3 g = spec.gyro_noise_std * m.schedule.gyro_at(mid);
      label.accel_var += a.cwiseProduct(a);
      label.gyro_var += g.cwiseProduct(g);
    }
    label.accel_var /= per;
    label.gyro_var /= per;
    m.labels.push_back(label);
  }
  return m;
}

InitialError draw_initial_error(const CorruptionSpec& spec, std::uint64_t seed) {
  auto rng = make_rng(mix_seed(seed, 5));
  std::normal_distribution<double> n01(0.0, 1.0);
  InitialError e;
  for (int i = 0; i < 3; ++i) e.dv(i) = spec.init_vel_err_std(i) * n01(rng);
  for (int i = 0; i < 3; ++i) e.dpsi(i) = spec.init_misalign_std * n01(rng);
  return e;
}

NavState apply_initial_error(const NavState& truth, const InitialError& err) {
  NavState est = truth;
  est.v_n = truth.v_n - err.dv;
  est.c_bn = nav::orthonormalize(nav::rodrigues(err.dpsi) * truth.c_bn);
  est.b_a_hat.setZero();
  est.b_g_hat.setZero();
  return est;
}

namespace {

net::ImuWindow window_of(const std::vector<nav::ImuSample>& imu, int epoch, int per, bool gyro) {
  if (per != net::kWindow) throw InvalidInput("ProcessNet windows need exactly 100 IMU samples per DVL interval");
  const long end = static_cast<long>(epoch) * per;
  if (epoch < 1 || end > static_cast<long>(imu.size())) throw InvalidInput("window epoch outside the IMU stream");
  net::ImuWindow w;
  for (int i = 0; i < per; ++i) {
    const auto& s = imu[static_cast<std::size_t>(end - per + i)];
    w.row(i) = (gyro ? s.w_b : s.f_b).transpose();
  }
  return w;
}

}  // namespace

net::ImuWindow accel_window(const std::vector<nav::ImuSample>& imu, int epoch, int per) {
  return window_of(imu, epoch, per, false);
}

net::ImuWindow gyro_window(const std::vector<nav::ImuSample>& imu, int epoch, int per) {
  return window_of(imu, epoch, per, true);
}

std::vector<net::TrainSample> accel_training_set(const MeasuredStreams& m, int per) {
  std::vector<net::TrainSample> out;
  for (std::size_t w = 0; w < m.labels.size(); ++w) {
    out.push_back({accel_window(m.imu, static_cast<int>(w) + 1, per), m.labels[w].accel_var});
  }
  return out;
}

std::vector<net::TrainSample> gyro_training_set(const MeasuredStreams& m, int per) {
  std::vector<net::TrainSample> out;
  for (std::size_t w = 0; w < m.labels.size(); ++w) {
    out.push_back({gyro_window(m.imu, static_cast<int>(w) + 1, per), m.labels[w].gyro_var});
  }
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  return out;
}

struct Table {
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  const std::string file = path.filename().string();
  std::ifstream in(path);
  if (!in) throw IngestError(file, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw IngestError(file, 0, "empty file");
  const auto header = split(line);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i >= header.size() || header[i] != columns[i]) throw IngestError(file, 0, "missing column '" + columns[i] + "'");
  }
  Table t;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() < columns.size()) throw IngestError(file, row, "expected " + std::to_string(columns.size()) + " fields");
    std::vector<double> vals(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string& c = cells[i];
      const auto res = std::from_chars(c.data(), c.data() + c.size(), vals[i]);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size() || !std::isfinite(vals[i])) {
        throw IngestError(file, row, "column '" + columns[i] + "' is not a finite number");
      }
    }
    if (!t.rows.empty() && !(vals[0] > t.rows.back()[0])) throw IngestError(file, row, "timestamps are not increasing");
    t.rows.push_back(std::move(vals));
  }
  if (t.rows.empty()) throw IngestError(file, 0, "no data rows");
  return t;
}

}  // namespace

Ingested ingest_csv(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  Ingested out;

  const Table imu = read_table(base / "imu.csv", {"t", "fx", "fy", "fz", "wx", "wy", "wz"});
  for (std::size_t r = 0; r < imu.rows.size(); ++r) {
    const auto& v = imu.rows[r];
    nav::ImuSample s;
    s.t = v[0];
    s.f_b = Vec3(v[1], v[2], v[3]);
    s.w_b = Vec3(v[4], v[5], v[6]);
    if (s.f_b.cwiseAbs().maxCoeff() > 100.0) throw IngestError("imu.csv", r + 1, "specific force exceeds 100 m/s^2");
    out.imu.push_back(s);
  }
  if (out.imu.size() >= 2) {
    out.imu_dt = (out.imu.back().t - out.imu.front().t) / static_cast<double>(out.imu.size() - 1);
    for (std::size_t r = 1; r < out.imu.size(); ++r) {
      const double step = out.imu[r].t - out.imu[r - 1].t;
      if (std::abs(step - out.imu_dt) > 0.01 * out.imu_dt) {
        throw IngestError("imu.csv", r + 1, "sample spacing deviates more than 1% from nominal");
      }
    }
  }

  const Table dvl = read_table(base / "dvl.csv", {"t", "vx", "vy", "vz", "valid"});
  for (std::size_t r = 0; r < dvl.rows.size(); ++r) {
    const auto& v = dvl.rows[r];
    if (v[4] != 0.0 && v[4] != 1.0) throw IngestError("dvl.csv", r + 1, "valid flag must be 0 or 1");
    out.dvl.push_back(DvlSample{v[0], Vec3(v[1], v[2], v[3]), v[4] == 1.0});
  }

  if (fs::exists(base / "truth.csv")) {
    const Table truth = read_table(base / "truth.csv", {"t", "yaw", "pitch", "roll", "vN", "vE", "vD"});
    std::vector<NavState> states;
    for (const auto& v : truth.rows) {
      NavState s;
      s.t = v[0];
      s.c_bn = nav::dcm_from_euler(v[1], v[2], v[3]);
      s.v_n = Vec3(v[4], v[5], v[6]);
      states.push_back(s);
    }
    out.truth = std::move(states);
  }
  return out;
}

void write_csv(const std::string& dir, const std::vector<nav::ImuSample>& imu, const std::vector<DvlSample>& dvl,
               const std::vector<NavState>* truth) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "imu.csv");
    out << "t,fx,fy,fz,wx,wy,wz\n";
    for (const auto& s : imu) {
      out << fmt(s.t) << ',' << fmt(s.f_b.x()) << ',' << fmt(s.f_b.y()) << ',' << fmt(s.f_b.z()) << ','
          << fmt(s.w_b.x()) << ',' << fmt(s.w_b.y()) << ',' << fmt(s.w_b.z()) << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "dvl.csv");
    out << "t,vx,vy,vz,valid\n";
    for (const auto& d : dvl) {
      out << fmt(d.t) << ',' << fmt(d.v_b.x()) << ',' << fmt(d.v_b.y()) << ',' << fmt(d.v_b.z()) << ','
          << (d.valid ? 1 : 0) << '\n';
    }
  }
  if (truth) {
    std::ofstream out(fs::path(dir) / "truth.csv");
    out << "t,yaw,pitch,roll,vN,vE,vD\n";
    for (const auto& s : *truth) {
      const Vec3 e = nav::euler_zyx(s.c_bn);
      out << fmt(s.t) << ',' << fmt(e(0)) << ',' << fmt(e(1)) << ',' << fmt(e(2)) << ',' << fmt(s.v_n.x()) << ','
          << fmt(s.v_n.y()) << ',' << fmt(s.v_n.z()) << '\n';
    }
  }
}

void write_labels_csv(const std::string& path, const std::vector<WindowLabel>& labels) {
  std::ofstream out(path);
  out << "t_start,acc_var_x,acc_var_y,acc_var_z,gyro_var_x,gyro_var_y,gyro_var_z\n";
  for (const auto& l : labels) {
    out << fmt(l.t_start);
    for (int i = 0; i < 3; ++i) out << ',' << fmt(l.accel_var(i));
    for (int i = 0; i < 3; ++i) out << ',' << fmt(l.gyro_var(i));
    out << '\n';
  }
}

Dataset dataset_from_ingested(const std::string& name, const Ingested& in) {
  if (!in.truth) throw IngestError("truth.csv", 0, "truth is required to evaluate a filter");
  const auto& truth = *in.truth;
  if (truth.size() != in.imu.size() + 1) {
    throw IngestError("truth.csv", 0, "expected one row per IMU sample plus the initial state");
  }
  if (in.imu.size() < 2 || in.dvl.empty()) throw IngestError("imu.csv", 0, "too few samples");
  Dataset d;
  d.name = name;
  d.truth = truth;
  d.imu = in.imu;
  d.dvl = in.dvl;
  d.imu_dt = in.imu_dt;
  const double period = in.dvl.size() >= 2 ? in.dvl[1].t - in.dvl[0].t : in.dvl[0].t - truth.front().t;
  const double ratio = period / in.imu_dt;
  d.imu_per_dvl = static_cast<int>(std::lround(ratio));
  if (d.imu_per_dvl < 1 || std::abs(ratio - d.imu_per_dvl) > 1e-3) {
    throw IngestError("dvl.csv", 0, "DVL period is not a whole number of IMU samples");
  }
  for (std::size_t j = 0; j < d.dvl.size(); ++j) {
    const std::size_t idx = (j + 1) * static_cast<std::size_t>(d.imu_per_dvl);
    if (idx >= truth.size() || std::abs(truth[idx].t - d.dvl[j].t) > 0.5 * in.imu_dt) {
      throw IngestError("dvl.csv", j + 1, "DVL epoch does not align with the IMU grid");
    }
  }
  return d;
}

}  // namespace anukf::sim
