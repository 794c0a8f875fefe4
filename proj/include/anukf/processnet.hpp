#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace anukf::net {

constexpr int kWindow = 100;
constexpr int kInChannels = 3;
constexpr int kChannels = 30;
constexpr int kKernel = 3;
constexpr int kPooled1 = kWindow / 2;   // 50
constexpr int kPooled2 = kPooled1 / 2;  // 25
constexpr int kFlat = kPooled2 * kChannels;
constexpr int kOutputs = 3;
constexpr int kConvLayers = 4;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ImuWindow = Eigen::Matrix<double, kWindow, kInChannels>;

/// First pooling stage. `Average` is 0.5·(a + b); `AsPrinted` evaluates
/// 0.5·a + b literally and exists only for comparison runs.
enum class PoolingMode { Average, AsPrinted };

/**
 * Trainable tensors of the network.
 *
 * Convolution kernels are stored im2col-ready: `conv_w[l]` has 3·C_in rows
 * ordered (tap, input channel) and one column per output channel, so
 * theta(j, k, h) lives at row h·C_in + j, column k. The same type carries
 * gradients.
 */
struct Params {
  std::array<Eigen::MatrixXd, kConvLayers> conv_w;
  std::array<Eigen::VectorXd, kConvLayers> conv_b;
  Eigen::MatrixXd head_w;  // 750 × 3
  Eigen::VectorXd head_b;  // 3

  static Params zeros();
  static int in_channels(int layer) { return layer == 0 ? kInChannels : kChannels; }

  double& theta(int layer, int j, int k, int h) { return conv_w[layer](h * in_channels(layer) + j, k); }
  double theta(int layer, int j, int k, int h) const { return conv_w[layer](h * in_channels(layer) + j, k); }

  Eigen::Index size() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  Params& operator+=(const Params& other);
  Params& operator*=(double s);
};

struct ProcessNetModel {
  Params params = Params::zeros();
  double in_scale = 1.0;
  double out_scale = 1.0;
  PoolingMode pooling = PoolingMode::Average;

  /// Fan-in scaled uniform kernels, zero biases.
  static ProcessNetModel initialized(std::uint64_t seed, double in_scale = 1.0, double out_scale = 1.0);

  /// Throws on wrong shapes, non-finite entries or non-positive scales.
  void validate() const;
};

/// Activations of one batched forward pass, rows ordered (sample, position).
struct ForwardCache {
  int batch = 0;
  RowMatrix input;                            // B·100 × 3, already scaled
  std::array<RowMatrix, kConvLayers> pre;     // conv outputs before ReLU
  std::array<RowMatrix, kConvLayers> post;    // after ReLU
  RowMatrix pooled1;                          // B·50 × 30
  RowMatrix pooled2;                          // B·25 × 30
  std::vector<std::uint8_t> argmax;           // B·25·30, 0 or 1 for the pair member
  RowMatrix flat;                             // B × 750
  RowMatrix net_out;                          // B × 3, before out_scale
};

/// Rows are samples, output in instrument units (after out_scale).
RowMatrix forward_batch(const ProcessNetModel& model, const std::vector<const ImuWindow*>& windows,
                        ForwardCache* cache = nullptr);

Eigen::Vector3d forward(const ProcessNetModel& model, const ImuWindow& window,
                        ForwardCache* cache = nullptr);

/// Reverse-mode gradients from a cache. `upstream_net` is dLoss/d(net_out),
/// i.e. with respect to the output before out_scale.
Params backward_cached(const ProcessNetModel& model, const ForwardCache& cache,
                       const RowMatrix& upstream_net);

/// Gradient of upstream·forward(window) with respect to every parameter.
Params backward(const ProcessNetModel& model, const ImuWindow& window, const Eigen::Vector3d& upstream);

/// (1/n)·Σ‖pred_i − target_i‖².
double mse_loss(const RowMatrix& pred, const RowMatrix& target);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  Optimizer optimizer = Optimizer::Adam;
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  /// Cosine decay of the step from learning_rate down to
  /// learning_rate·lr_final_fraction over the run; 1 keeps it constant.
  double lr_final_fraction = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 7;
};

struct TrainSample {
  ImuWindow window;
  Eigen::Vector3d target;  // instrument units
};

struct TrainReport {
  double initial_loss = 0.0;       // full-set MSE before the first step
  std::vector<double> epoch_loss;  // mean mini-batch MSE of each epoch
  double final_loss = 0.0;         // full-set MSE after the last epoch
};

/**
 * Adam on mse_loss. Losses are computed in network units, that is with the
 * targets divided by out_scale, which equals the physical MSE divided by
 * out_scale². Deterministic for a given seed.
 */
TrainReport train(ProcessNetModel& model, const std::vector<TrainSample>& dataset, const TrainConfig& config);

/// MSE of the model over a dataset in instrument units.
double evaluate_mse(const ProcessNetModel& model, const std::vector<TrainSample>& dataset);

std::string save_weights(const ProcessNetModel& model);
ProcessNetModel load_weights(const std::string& text);
void save_weights_file(const ProcessNetModel& model, const std::string& path);
ProcessNetModel load_weights_file(const std::string& path);

}  // namespace anukf::net
