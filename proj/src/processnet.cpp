#include "anukf/processnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "anukf/errors.hpp"

namespace anukf::net {

namespace {

const char* const kLayerNames[kConvLayers] = {"l1", "l2", "l4", "l5"};

// Rows (sample, position) by columns (tap, channel); zero padding of one
// sample on each side.
RowMatrix im2col(const RowMatrix& a, int batch, int len) {
  const Eigen::Index c = a.cols();
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(batch) * len, kKernel * c);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * len;
    for (int t = 0; t < len; ++t) {
      for (int h = 0; h < kKernel; ++h) {
        const int src = t + h - 1;
        if (src < 0 || src >= len) continue;
        x.row(base + t).segment(h * c, c) = a.row(base + src);
      }
    }
  }
  return x;
}

RowMatrix col2im(const RowMatrix& dx, int batch, int len, Eigen::Index c) {
  RowMatrix da = RowMatrix::Zero(static_cast<Eigen::Index>(batch) * len, c);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index base = static_cast<Eigen::Index>(b) * len;
    for (int t = 0; t < len; ++t) {
      for (int h = 0; h < kKernel; ++h) {
        const int src = t + h - 1;
        if (src < 0 || src >= len) continue;
        da.row(base + src) += dx.row(base + t).segment(h * c, c);
      }
    }
  }
  return da;
}

void require_finite(const RowMatrix& m, const char* layer) {
  if (!m.allFinite()) throw NumericFault(layer);
}

int conv_length(int layer) { return layer < 2 ? kWindow : kPooled1; }

std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Params Params::zeros() {
  Params p;
  for (int l = 0; l < kConvLayers; ++l) {
    p.conv_w[l] = Eigen::MatrixXd::Zero(kKernel * in_channels(l), kChannels);
    p.conv_b[l] = Eigen::VectorXd::Zero(kChannels);
  }
  p.head_w = Eigen::MatrixXd::Zero(kFlat, kOutputs);
  p.head_b = Eigen::VectorXd::Zero(kOutputs);
  return p;
}

Eigen::Index Params::size() const {
  Eigen::Index n = head_w.size() + head_b.size();
  for (int l = 0; l < kConvLayers; ++l) n += conv_w[l].size() + conv_b[l].size();
  return n;
}

Eigen::VectorXd Params::flatten() const {
  Eigen::VectorXd flat(size());
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  for (int l = 0; l < kConvLayers; ++l) {
    put(conv_w[l]);
    put(conv_b[l]);
  }
  put(head_w);
  put(head_b);
  return flat;
}

void Params::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw InvalidInput("parameter vector has the wrong length");
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  };
  for (int l = 0; l < kConvLayers; ++l) {
    take(conv_w[l]);
    take(conv_b[l]);
  }
  take(head_w);
  take(head_b);
}

Params& Params::operator+=(const Params& other) {
  for (int l = 0; l < kConvLayers; ++l) {
    conv_w[l] += other.conv_w[l];
    conv_b[l] += other.conv_b[l];
  }
  head_w += other.head_w;
  head_b += other.head_b;
  return *this;
}

Params& Params::operator*=(double s) {
  for (int l = 0; l < kConvLayers; ++l) {
    conv_w[l] *= s;
    conv_b[l] *= s;
  }
  head_w *= s;
  head_b *= s;
  return *this;
}

ProcessNetModel ProcessNetModel::initialized(std::uint64_t seed, double in_scale, double out_scale) {
  ProcessNetModel m;
  m.in_scale = in_scale;
  m.out_scale = out_scale;
  auto rng = make_rng(seed);
  for (int l = 0; l < kConvLayers; ++l) {
    const double bound = std::sqrt(6.0 / (kKernel * Params::in_channels(l)));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < m.params.conv_w[l].size(); ++i) m.params.conv_w[l].data()[i] = u(rng);
  }
  // Layer-1 kernels start with zero tap sum so the first features respond to
  // sample-to-sample variation rather than to gravity or the turn-rate offset,
  // which otherwise swamp the noise signal by two orders of magnitude.
  auto& w1 = m.params.conv_w[0];
  for (int j = 0; j < kInChannels; ++j) {
    for (int k = 0; k < kChannels; ++k) {
      double mean = 0.0;
      for (int h = 0; h < kKernel; ++h) mean += w1(h * kInChannels + j, k);
      mean /= kKernel;
      for (int h = 0; h < kKernel; ++h) w1(h * kInChannels + j, k) -= mean;
    }
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(kFlat));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.params.head_w.size(); ++i) m.params.head_w.data()[i] = u(rng);
  return m;
}

void ProcessNetModel::validate() const {
  auto check = [](const auto& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) throw WeightFormatError(name, "unexpected shape");
    if (!m.allFinite()) throw WeightFormatError(name, "non-finite entry");
  };
  for (int l = 0; l < kConvLayers; ++l) {
    check(params.conv_w[l], kKernel * Params::in_channels(l), kChannels, "theta" + std::to_string(l + 1));
    check(params.conv_b[l], kChannels, 1, "b" + std::to_string(l + 1));
  }
  check(params.head_w, kFlat, kOutputs, "theta5");
  check(params.head_b, kOutputs, 1, "b5");
  if (!(in_scale > 0.0) || !std::isfinite(in_scale)) throw WeightFormatError("in_scale", "must be positive");
  if (!(out_scale > 0.0) || !std::isfinite(out_scale)) throw WeightFormatError("out_scale", "must be positive");
}

RowMatrix forward_batch(const ProcessNetModel& model, const std::vector<const ImuWindow*>& windows,
                        ForwardCache* cache) {
  const int batch = static_cast<int>(windows.size());
  if (batch == 0) throw InvalidInput("forward pass needs at least one window");
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.batch = batch;

  c.input.resize(static_cast<Eigen::Index>(batch) * kWindow, kInChannels);
  for (int b = 0; b < batch; ++b) {
    if (!windows[b]->allFinite()) throw InvalidInput("IMU window contains non-finite samples");
    c.input.middleRows(static_cast<Eigen::Index>(b) * kWindow, kWindow) = model.in_scale * *windows[b];
  }

  const Params& p = model.params;
  const RowMatrix* in = &c.input;
  for (int l = 0; l < kConvLayers; ++l) {
    const int len = conv_length(l);
    c.pre[l] = im2col(*in, batch, len) * p.conv_w[l];
    c.pre[l].rowwise() += p.conv_b[l].transpose();
    require_finite(c.pre[l], kLayerNames[l]);
    c.post[l] = c.pre[l].cwiseMax(0.0);

    if (l == 1) {
      // Layer 3: pairwise average pooling.
      c.pooled1.resize(static_cast<Eigen::Index>(batch) * kPooled1, kChannels);
      const double w_first = 0.5;
      const double w_second = model.pooling == PoolingMode::Average ? 0.5 : 1.0;
      for (Eigen::Index r = 0; r < c.pooled1.rows(); ++r) {
        c.pooled1.row(r) = w_first * c.post[1].row(2 * r) + w_second * c.post[1].row(2 * r + 1);
      }
      require_finite(c.pooled1, "l3");
      in = &c.pooled1;
    } else {
      in = &c.post[l];
    }
  }

  // Layer 6: pairwise max pooling.
  c.pooled2.resize(static_cast<Eigen::Index>(batch) * kPooled2, kChannels);
  c.argmax.assign(static_cast<std::size_t>(c.pooled2.size()), 0);
  for (Eigen::Index r = 0; r < c.pooled2.rows(); ++r) {
    for (int k = 0; k < kChannels; ++k) {
      const double a = c.post[3](2 * r, k);
      const double b = c.post[3](2 * r + 1, k);
      const bool second = b > a;
      c.argmax[static_cast<std::size_t>(r * kChannels + k)] = second;
      c.pooled2(r, k) = second ? b : a;
    }
  }

  // Row-major storage makes the position-major flatten a reinterpretation.
  c.flat = Eigen::Map<const RowMatrix>(c.pooled2.data(), batch, kFlat);
  c.net_out = c.flat * p.head_w;
  c.net_out.rowwise() += p.head_b.transpose();
  require_finite(c.net_out, "output");
  return model.out_scale * c.net_out;
}

Eigen::Vector3d forward(const ProcessNetModel& model, const ImuWindow& window, ForwardCache* cache) {
  const RowMatrix out = forward_batch(model, {&window}, cache);
  return out.row(0).transpose();
}

Params backward_cached(const ProcessNetModel& model, const ForwardCache& c, const RowMatrix& upstream_net) {
  const int batch = c.batch;
  if (upstream_net.rows() != batch || upstream_net.cols() != kOutputs) {
    throw InvalidInput("upstream gradient shape does not match the cached batch");
  }
  const Params& p = model.params;
  Params g = Params::zeros();

  g.head_w = c.flat.transpose() * upstream_net;
  g.head_b = upstream_net.colwise().sum().transpose();
  const RowMatrix d_flat = upstream_net * p.head_w.transpose();
  const Eigen::Map<const RowMatrix> d_pooled2(d_flat.data(), static_cast<Eigen::Index>(batch) * kPooled2, kChannels);

  RowMatrix d_post = RowMatrix::Zero(c.post[3].rows(), kChannels);
  for (Eigen::Index r = 0; r < d_pooled2.rows(); ++r) {
    for (int k = 0; k < kChannels; ++k) {
      const int pick = c.argmax[static_cast<std::size_t>(r * kChannels + k)];
      d_post(2 * r + pick, k) = d_pooled2(r, k);
    }
  }

  for (int l = kConvLayers - 1; l >= 0; --l) {
    const int len = conv_length(l);
    const RowMatrix d_pre = d_post.cwiseProduct((c.pre[l].array() > 0.0).cast<double>().matrix());
    const RowMatrix* layer_in = l == 0 ? &c.input : (l == 2 ? &c.pooled1 : &c.post[l - 1]);
    g.conv_w[l] = im2col(*layer_in, batch, len).transpose() * d_pre;
    g.conv_b[l] = d_pre.colwise().sum().transpose();
    if (l == 0) break;

    const RowMatrix d_in = col2im(d_pre * p.conv_w[l].transpose(), batch, len, layer_in->cols());
    if (l == 2) {
      const double w_first = 0.5;
      const double w_second = model.pooling == PoolingMode::Average ? 0.5 : 1.0;
      d_post.resize(c.post[1].rows(), kChannels);
      for (Eigen::Index r = 0; r < d_in.rows(); ++r) {
        d_post.row(2 * r) = w_first * d_in.row(r);
        d_post.row(2 * r + 1) = w_second * d_in.row(r);
      }
    } else {
      d_post = d_in;
    }
  }
  return g;
}

Params backward(const ProcessNetModel& model, const ImuWindow& window, const Eigen::Vector3d& upstream) {
  ForwardCache cache;
  forward(model, window, &cache);
  RowMatrix up(1, kOutputs);
  up.row(0) = model.out_scale * upstream.transpose();
  return backward_cached(model, cache, up);
}

double mse_loss(const RowMatrix& pred, const RowMatrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw InvalidInput("mse_loss: shape mismatch");
  if (pred.rows() < 1) throw InvalidInput("mse_loss: empty batch");
  return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

namespace {

constexpr std::size_t kEvalChunk = 256;

double dataset_loss(const ProcessNetModel& model, const std::vector<TrainSample>& data, double target_scale) {
  double total = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(data.size(), start + kEvalChunk);
    std::vector<const ImuWindow*> windows;
    RowMatrix target(static_cast<Eigen::Index>(stop - start), kOutputs);
    for (std::size_t i = start; i < stop; ++i) {
      windows.push_back(&data[i].window);
      target.row(static_cast<Eigen::Index>(i - start)) = data[i].target.transpose() * target_scale;
    }
    ForwardCache cache;
    forward_batch(model, windows, &cache);
    total += (cache.net_out - target).squaredNorm();
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

double evaluate_mse(const ProcessNetModel& model, const std::vector<TrainSample>& dataset) {
  if (dataset.empty()) throw InvalidInput("empty dataset");
  return dataset_loss(model, dataset, 1.0 / model.out_scale) * model.out_scale * model.out_scale;
}

TrainReport train(ProcessNetModel& model, const std::vector<TrainSample>& dataset, const TrainConfig& config) {
  if (dataset.empty()) throw InvalidInput("training dataset is empty");
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0) ||
      !(config.lr_final_fraction > 0.0) || config.lr_final_fraction > 1.0) {
    throw InvalidInput("invalid training configuration");
  }
  model.validate();
  const double target_scale = 1.0 / model.out_scale;

  TrainReport report;
  report.initial_loss = dataset_loss(model, dataset, target_scale);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(config.seed);

  Eigen::VectorXd theta = model.params.flatten();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  long step = 0;
  const long batches_per_epoch =
      static_cast<long>((dataset.size() + static_cast<std::size_t>(config.batch_size) - 1) / static_cast<std::size_t>(config.batch_size));
  const double total_steps = static_cast<double>(batches_per_epoch) * config.epochs;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto n = static_cast<Eigen::Index>(stop - start);
      std::vector<const ImuWindow*> windows;
      RowMatrix target(n, kOutputs);
      for (std::size_t i = start; i < stop; ++i) {
        const TrainSample& s = dataset[order[i]];
        windows.push_back(&s.window);
        target.row(static_cast<Eigen::Index>(i - start)) = s.target.transpose() * target_scale;
      }

      ForwardCache cache;
      try {
        forward_batch(model, windows, &cache);
      } catch (const NumericFault&) {
        throw TrainingFault(epoch);
      }
      const RowMatrix diff = cache.net_out - target;
      const double loss = diff.squaredNorm() / static_cast<double>(n);
      if (!std::isfinite(loss)) throw TrainingFault(epoch);
      epoch_sum += loss * static_cast<double>(n);

      const Eigen::VectorXd grad = backward_cached(model, cache, (2.0 / static_cast<double>(n)) * diff).flatten();
      const double progress = static_cast<double>(step) / total_steps;
      const double lr = config.learning_rate *
                        (config.lr_final_fraction +
                         (1.0 - config.lr_final_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
      ++step;
      if (config.optimizer == Optimizer::Sgd) {
        theta -= lr * grad;
      } else {
        m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
        m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
        theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + config.epsilon);
      }
      if (!theta.allFinite()) throw TrainingFault(epoch);
      model.params.assign(theta);
    }
    report.epoch_loss.push_back(epoch_sum / static_cast<double>(dataset.size()));
  }
  report.final_loss = dataset_loss(model, dataset, target_scale);
  return report;
}

// Weight file: a JSON document with nested arrays theta1 [3][30][3],
// theta2..theta4 [30][30][3] indexed (input channel, output channel, tap),
// theta5 [750][3], and bias vectors b1..b5.

namespace {

using nlohmann::json;

constexpr const char* kFormatName = "anukf-processnet";
constexpr int kFormatVersion = 1;

json conv_to_json(const Params& p, int l) {
  const int cin = Params::in_channels(l);
  json out = json::array();
  for (int j = 0; j < cin; ++j) {
    json per_out = json::array();
    for (int k = 0; k < kChannels; ++k) {
      json taps = json::array();
      for (int h = 0; h < kKernel; ++h) taps.push_back(p.theta(l, j, k, h));
      per_out.push_back(std::move(taps));
    }
    out.push_back(std::move(per_out));
  }
  return out;
}

const json& expect_array(const json& node, std::size_t length, const std::string& tensor, int depth) {
  if (!node.is_array()) throw WeightFormatError(tensor, "expected an array at depth " + std::to_string(depth));
  if (node.size() != length) {
    throw WeightFormatError(tensor, "expected " + std::to_string(length) + " entries at depth " +
                                        std::to_string(depth) + ", found " + std::to_string(node.size()));
  }
  return node;
}

double expect_number(const json& node, const std::string& tensor) {
  if (!node.is_number()) throw WeightFormatError(tensor, "non-numeric entry");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw WeightFormatError(tensor, "non-finite entry");
  return v;
}

const json& tensor_node(const json& tensors, const std::string& name) {
  if (!tensors.contains(name)) throw WeightFormatError(name, "missing tensor");
  return tensors.at(name);
}

}  // namespace

std::string save_weights(const ProcessNetModel& model) {
  model.validate();
  const Params& p = model.params;
  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kFormatVersion;
  doc["in_scale"] = model.in_scale;
  doc["out_scale"] = model.out_scale;
  doc["pooling"] = model.pooling == PoolingMode::Average ? "average" : "as_printed";
  json tensors;
  for (int l = 0; l < kConvLayers; ++l) {
    tensors["theta" + std::to_string(l + 1)] = conv_to_json(p, l);
    tensors["b" + std::to_string(l + 1)] = std::vector<double>(p.conv_b[l].data(), p.conv_b[l].data() + kChannels);
  }
  json head = json::array();
  for (int r = 0; r < kFlat; ++r) head.push_back({p.head_w(r, 0), p.head_w(r, 1), p.head_w(r, 2)});
  tensors["theta5"] = std::move(head);
  tensors["b5"] = std::vector<double>(p.head_b.data(), p.head_b.data() + kOutputs);
  doc["tensors"] = std::move(tensors);
  return doc.dump(1);
}

ProcessNetModel load_weights(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw WeightFormatError("", std::string("malformed weight document: ") + e.what());
  }
  if (!doc.is_object()) throw WeightFormatError("", "weight document must be an object");
  if (doc.value("format", std::string()) != kFormatName) throw WeightFormatError("", "unrecognized format tag");
  if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kFormatVersion) {
    throw WeightFormatError("", "unsupported weight file version");
  }

  ProcessNetModel m;
  if (!doc.contains("in_scale")) throw WeightFormatError("in_scale", "missing");
  if (!doc.contains("out_scale")) throw WeightFormatError("out_scale", "missing");
  m.in_scale = expect_number(doc["in_scale"], "in_scale");
  m.out_scale = expect_number(doc["out_scale"], "out_scale");
  const std::string pooling = doc.value("pooling", std::string("average"));
  if (pooling == "average") {
    m.pooling = PoolingMode::Average;
  } else if (pooling == "as_printed") {
    m.pooling = PoolingMode::AsPrinted;
  } else {
    throw WeightFormatError("", "unknown pooling mode '" + pooling + "'");
  }
  if (!doc.contains("tensors") || !doc["tensors"].is_object()) throw WeightFormatError("", "missing tensors object");
  const json& tensors = doc["tensors"];

  Params& p = m.params;
  for (int l = 0; l < kConvLayers; ++l) {
    const std::string tname = "theta" + std::to_string(l + 1);
    const int cin = Params::in_channels(l);
    const json& t = expect_array(tensor_node(tensors, tname), static_cast<std::size_t>(cin), tname, 0);
    for (int j = 0; j < cin; ++j) {
      const json& row = expect_array(t[j], kChannels, tname, 1);
      for (int k = 0; k < kChannels; ++k) {
        const json& taps = expect_array(row[k], kKernel, tname, 2);
        for (int h = 0; h < kKernel; ++h) p.theta(l, j, k, h) = expect_number(taps[h], tname);
      }
    }
    const std::string bname = "b" + std::to_string(l + 1);
    const json& b = expect_array(tensor_node(tensors, bname), kChannels, bname, 0);
    for (int k = 0; k < kChannels; ++k) p.conv_b[l](k) = expect_number(b[k], bname);
  }
  const json& head = expect_array(tensor_node(tensors, "theta5"), kFlat, "theta5", 0);
  for (int r = 0; r < kFlat; ++r) {
    const json& row = expect_array(head[r], kOutputs, "theta5", 1);
    for (int o = 0; o < kOutputs; ++o) p.head_w(r, o) = expect_number(row[o], "theta5");
  }
  const json& b5 = expect_array(tensor_node(tensors, "b5"), kOutputs, "b5", 0);
  for (int o = 0; o < kOutputs; ++o) p.head_b(o) = expect_number(b5[o], "b5");

  m.validate();
  return m;
}

void save_weights_file(const ProcessNetModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write weight file " + path);
  out << save_weights(model) << '\n';
  if (!out) throw InvalidInput("failed writing weight file " + path);
}

ProcessNetModel load_weights_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WeightFormatError("", "cannot open weight file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_weights(buf.str());
}

}  // namespace anukf::net
