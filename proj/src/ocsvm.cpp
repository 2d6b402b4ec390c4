#include "ghostdet/ocsvm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ghostdet/dae.hpp"
#include "ghostdet/rng.hpp"

namespace ghostdet::ocsvm {

namespace {

double dot(const Sample& a, const Sample& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double objective(const OcsvmModel& m, const std::vector<Sample>& data) {
  double hinge = 0.0;
  for (const auto& x : data) hinge += std::max(0.0, m.rho - dot(m.w, x));
  return 0.5 * dot(m.w, m.w) + hinge / (m.nu * static_cast<double>(data.size())) - m.rho;
}

OcsvmModel train_ocsvm(const std::vector<Sample>& data, const OcsvmConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_ocsvm: empty training set");
  if (!(config.nu > 0 && config.nu <= 1)) throw std::invalid_argument("train_ocsvm: nu must be in (0, 1]");
  if (config.epochs < 0 || !(config.learning_rate > 0))
    throw std::invalid_argument("train_ocsvm: epochs >= 0 and learning_rate > 0 required");
  OcsvmModel m;
  m.nu = config.nu;
  std::mt19937_64 rng(config.seed);
  for (double& wi : m.w) wi = 0.01 * standard_normal(rng);
  const double n = static_cast<double>(data.size());
  const double initial = std::abs(objective(m, data)) + 1.0;

  OcsvmModel best = m;
  double best_obj = objective(m, data);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Sample gw = m.w;
    double violators = 0.0;
    for (const auto& x : data) {
      if (dot(m.w, x) < m.rho) {
        violators += 1.0;
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] -= x[i] / (m.nu * n);
      }
    }
    const double grho = violators / (m.nu * n) - 1.0;
    for (std::size_t i = 0; i < gw.size(); ++i) m.w[i] -= config.learning_rate * gw[i];
    m.rho -= config.learning_rate * grho;
    const double obj = objective(m, data);
    if (!std::isfinite(obj) || std::abs(obj) > config.divergence_factor * initial)
      throw dae::DivergenceError("train_ocsvm: objective diverged at epoch " + std::to_string(epoch));
    if (obj < best_obj) {
      best_obj = obj;
      best = m;
    }
  }
  return best;
}

double score_ocsvm(const OcsvmModel& model, const Sample& y) { return model.rho - dot(model.w, y); }

double outlier_fraction(const OcsvmModel& model, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  std::size_t k = 0;
  for (const auto& x : data) k += dot(model.w, x) < model.rho;
  return static_cast<double>(k) / static_cast<double>(data.size());
}

}  // namespace ghostdet::ocsvm
