#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ghostdet::dae {

using Sample = std::array<double, 5>;
/// Row-per-sample batch.
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Layer widths of a symmetric dense autoencoder and which layers apply
/// ReLU. The reference shape is 5-128-64-20-64-128-5 with no activation at
/// the 20-unit bottleneck or at the output.
struct Architecture {
  std::vector<int> widths{5, 128, 64, 20, 64, 128, 5};
  /// One entry per weight layer (widths.size() - 1).
  std::vector<bool> relu{true, true, false, true, true, false};

  std::size_t layers() const { return widths.size() - 1; }
  std::size_t bottleneck_layer() const { return layers() / 2 - 1; }
  int bottleneck_width() const { return widths[layers() / 2]; }
  /// Builds the mask for the given widths: ReLU everywhere except the
  /// bottleneck and the output.
  static Architecture with_widths(std::vector<int> widths);
  /// Throws std::invalid_argument on a broken invariant.
  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DaeModel {
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;  ///< in x out
  std::vector<Eigen::VectorXd> biases;   ///< out

  std::size_t parameter_count() const;
  bool operator==(const DaeModel& o) const;
};

/// Zero-mean normal weights with std 1/sqrt(fan_in); zero biases.
DaeModel init_model(const Architecture& arch, std::uint64_t seed);

struct ForwardCache {
  /// inputs[l] is the input of layer l; inputs.back() is the output.
  std::vector<Batch> inputs;
  /// Pre-activation of each layer.
  std::vector<Batch> pre;
};

/// Batched forward pass. Rejects non-finite input.
Batch forward(const DaeModel& model, const Batch& x, ForwardCache* cache = nullptr);

struct Reconstruction {
  Sample output{};
  ForwardCache cache;
};

Reconstruction forward(const DaeModel& model, const Sample& x);

/// Euclidean norm of the residual (not squared).
double loss(const Sample& x, const Sample& reconstruction);
/// Mean of the per-sample norms.
double batch_loss(const Batch& x, const Batch& reconstruction);
/// Per-sample norms.
std::vector<double> sample_losses(const Batch& x, const Batch& reconstruction);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Gradient of mean_i ||x_i - x'_i|| over the batch held in `cache`. Rows
/// with zero residual contribute nothing.
Gradients backward(const DaeModel& model, const ForwardCache& cache, const Batch& x);

/// Gradient of the single-sample loss ||x - x'||.
Gradients backward(const DaeModel& model, const ForwardCache& cache, const Sample& x);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.00095;
  int batch_size = 64;
  std::uint64_t seed = 0;
  /// Multiplier applied to the learning rate after every epoch; 1 keeps it
  /// constant.
  double lr_decay = 1.0;
  /// Abort when an epoch loss exceeds this multiple of the initial loss.
  double divergence_factor = 10.0;
};

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  ///< mean training loss per epoch
  std::vector<double> train_losses;  ///< final per-sample training losses
  std::vector<double> val_losses;    ///< final per-sample validation losses
  TrainConfig config;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain mini-batch gradient descent.
TrainReport train(DaeModel& model, const Batch& train_set, const Batch& val_set, const TrainConfig& config);

/// Reconstruction error ||y - y'||.
double score(const DaeModel& model, const Sample& y);
std::vector<double> score(const DaeModel& model, const Batch& y);

Batch to_batch(const std::vector<Sample>& rows);

}  // namespace ghostdet::dae
