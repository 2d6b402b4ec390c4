#include "ghostdet/dae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ghostdet/rng.hpp"

namespace ghostdet::dae {

namespace {

constexpr int kFeatureDim = 5;
constexpr int kLatentDim = 20;

}  // namespace

Architecture Architecture::with_widths(std::vector<int> widths) {
  Architecture a;
  a.widths = std::move(widths);
  const std::size_t n = a.widths.size() < 2 ? 0 : a.widths.size() - 1;
  a.relu.assign(n, true);
  if (n >= 2) {
    a.relu[n / 2 - 1] = false;
    a.relu[n - 1] = false;
  }
  return a;
}

void Architecture::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument("architecture: " + what); };
  if (widths.size() < 5 || widths.size() % 2 == 0) fail("need an odd number (>= 5) of layer widths");
  if (relu.size() != layers()) fail("activation mask must have one entry per weight layer");
  if (widths.front() != kFeatureDim || widths.back() != kFeatureDim) fail("input and output width must be 5");
  for (int w : widths)
    if (w <= 0) fail("widths must be positive");
  if (widths[1] <= widths[0]) fail("first hidden layer must be wider than the input");
  if (bottleneck_width() != kLatentDim) fail("bottleneck width must be 20");
  if (relu[bottleneck_layer()]) fail("no activation allowed at the bottleneck");
  if (relu.back()) fail("no activation allowed at the output");
}

std::size_t DaeModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool DaeModel::operator==(const DaeModel& o) const {
  if (!(arch == o.arch) || weights.size() != o.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols()) return false;
    if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
  }
  return true;
}

DaeModel init_model(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  DaeModel m;
  m.arch = arch;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < arch.layers(); ++l) {
    const int in = arch.widths[l];
    const int out = arch.widths[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    Eigen::MatrixXd w(in, out);
    for (int j = 0; j < out; ++j)
      for (int i = 0; i < in; ++i) w(i, j) = scale * standard_normal(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return m;
}

Batch forward(const DaeModel& model, const Batch& x, ForwardCache* cache) {
  if (x.cols() != kFeatureDim) throw std::invalid_argument("forward: samples must have 5 columns");
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Batch a = x;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Batch z = a * model.weights[l];
    z.rowwise() += model.biases[l].transpose();
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    a = model.arch.relu[l] ? Batch(z.cwiseMax(0.0)) : std::move(z);
  }
  if (cache) cache->inputs.push_back(a);
  return a;
}

Batch to_batch(const std::vector<Sample>& rows) {
  Batch b(static_cast<Eigen::Index>(rows.size()), kFeatureDim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < kFeatureDim; ++j) b(static_cast<Eigen::Index>(i), j) = rows[i][j];
  return b;
}

Reconstruction forward(const DaeModel& model, const Sample& x) {
  Reconstruction r;
  const Batch out = forward(model, to_batch({x}), &r.cache);
  for (int j = 0; j < kFeatureDim; ++j) r.output[j] = out(0, j);
  return r;
}

double loss(const Sample& x, const Sample& reconstruction) {
  double s = 0.0;
  for (int j = 0; j < kFeatureDim; ++j) s += (x[j] - reconstruction[j]) * (x[j] - reconstruction[j]);
  return std::sqrt(s);
}

std::vector<double> sample_losses(const Batch& x, const Batch& reconstruction) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = (x.row(i) - reconstruction.row(i)).norm();
  return out;
}

double batch_loss(const Batch& x, const Batch& reconstruction) {
  const auto l = sample_losses(x, reconstruction);
  if (l.empty()) return 0.0;
  return std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
}

Gradients backward(const DaeModel& model, const ForwardCache& cache, const Batch& x) {
  const std::size_t n_layers = model.weights.size();
  if (cache.inputs.size() != n_layers + 1) throw std::invalid_argument("backward: cache does not match model");
  const Batch& out = cache.inputs.back();
  const double inv_batch = 1.0 / static_cast<double>(x.rows());
  Batch g = out - x;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const double n = g.row(i).norm();
    // Subgradient 0 at a zero residual.
    g.row(i) = n > 0.0 ? Eigen::RowVectorXd(g.row(i) * (inv_batch / n)) : Eigen::RowVectorXd::Zero(g.cols());
  }
  Gradients grads;
  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);
  for (std::size_t k = n_layers; k-- > 0;) {
    if (model.arch.relu[k]) g = g.cwiseProduct((cache.pre[k].array() > 0.0).cast<double>().matrix());
    grads.weights[k] = cache.inputs[k].transpose() * g;
    grads.biases[k] = g.colwise().sum().transpose();
    if (k > 0) g = g * model.weights[k].transpose();
  }
  return grads;
}

Gradients backward(const DaeModel& model, const ForwardCache& cache, const Sample& x) {
  return backward(model, cache, to_batch({x}));
}

TrainReport train(DaeModel& model, const Batch& train_set, const Batch& val_set, const TrainConfig& config) {
  if (train_set.rows() == 0) throw std::invalid_argument("train: empty training set");
  if (config.epochs < 0 || config.batch_size <= 0 || !(config.learning_rate > 0))
    throw std::invalid_argument("train: epochs >= 0, batch_size > 0 and learning_rate > 0 required");
  TrainReport report;
  report.config = config;
  report.initial_loss = batch_loss(train_set, forward(model, train_set));

  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train_set.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double lr = config.learning_rate;
  ForwardCache cache;
  Batch batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.resize(static_cast<Eigen::Index>(end - start), train_set.cols());
      for (std::size_t i = start; i < end; ++i) batch.row(static_cast<Eigen::Index>(i - start)) = train_set.row(order[i]);
      forward(model, batch, &cache);
      for (Eigen::Index i = 0; i < batch.rows(); ++i) epoch_sum += (cache.inputs.back().row(i) - batch.row(i)).norm();
      const Gradients g = backward(model, cache, batch);
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] -= lr * g.weights[l];
        model.biases[l] -= lr * g.biases[l];
      }
    }
    const double epoch_loss = epoch_sum / static_cast<double>(order.size());
    report.epoch_losses.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss) || epoch_loss > config.divergence_factor * report.initial_loss)
      throw DivergenceError("train: epoch " + std::to_string(epoch) + " loss " + std::to_string(epoch_loss) +
                            " exceeds " + std::to_string(config.divergence_factor) + "x the initial loss " +
                            std::to_string(report.initial_loss));
    lr *= config.lr_decay;
  }
  report.train_losses = sample_losses(train_set, forward(model, train_set));
  if (val_set.rows() > 0) report.val_losses = sample_losses(val_set, forward(model, val_set));
  return report;
}

double score(const DaeModel& model, const Sample& y) { return loss(y, forward(model, y).output); }

std::vector<double> score(const DaeModel& model, const Batch& y) { return sample_losses(y, forward(model, y)); }

}  // namespace ghostdet::dae
