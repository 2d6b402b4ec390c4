#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ghostdet::ocsvm {

using Sample = std::array<double, 5>;

/// Linear one-class SVM: a point is an outlier when w.x < rho.
struct OcsvmModel {
  Sample w{};
  double rho = 0.0;
  double nu = 0.1;
  friend bool operator==(const OcsvmModel&, const OcsvmModel&) = default;
};

struct OcsvmConfig {
  double nu = 0.1;
  int epochs = 500;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  double divergence_factor = 10.0;
};

/// Primal objective 1/2 |w|^2 + 1/(nu n) sum max(0, rho - w.x_i) - rho.
double objective(const OcsvmModel& model, const std::vector<Sample>& data);

/// Full-batch subgradient descent on the primal objective from a small
/// seeded random start. Returns the iterate with the lowest objective.
OcsvmModel train_ocsvm(const std::vector<Sample>& data, const OcsvmConfig& config);

/// rho - w.y; positive means outside the learned half-space.
double score_ocsvm(const OcsvmModel& model, const Sample& y);

/// Fraction of samples with w.x < rho.
double outlier_fraction(const OcsvmModel& model, const std::vector<Sample>& data);

}  // namespace ghostdet::ocsvm
