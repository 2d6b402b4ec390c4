#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ghostdet::eval {

struct RocPoint {
  double threshold = 0.0;  ///< +inf for the initial (0, 0) point
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocReport {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::string detector;
  std::string dataset;
};

/// Sweeps every distinct score as a threshold (score >= t flags anomalous),
/// treating tied scores as one step. AUC by the trapezoidal rule.
RocReport roc_curve(const std::vector<double>& scores_normal, const std::vector<double>& scores_anom);

/// P(anomalous score > normal score) over all pairs, ties counting 1/2.
/// Quadratic brute force, kept independent of roc_curve.
double auc_oracle(const std::vector<double>& scores_normal, const std::vector<double>& scores_anom);

/// TPR at `target_fpr` by linear interpolation along the curve. Where the
/// curve is vertical at exactly the target, the highest TPR is used.
double tpr_at_fpr(const RocReport& report, double target_fpr);

/// Adjusted mutual information with the hypergeometric expected MI and the
/// arithmetic-mean normalisation. Zero-entropy labelings give 0 unless both
/// are the same single cluster, which gives 1.
double ami(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct LossComparison {
  double ami = 0.0;
  double mean_train = 0.0;
  double mean_val = 0.0;
  double var_train = 0.0;
  double var_val = 0.0;
};

/// Rank-paired decile agreement between two loss samples. The larger
/// sample is subsampled (seeded) to the size of the smaller, both are
/// sorted and paired by rank, and every element is labelled with its
/// decile in the training losses. AMI of the two label sequences is
/// reported next to the means and (unbiased) variances of the full samples.
LossComparison compare_loss_distributions(const std::vector<double>& train_losses,
                                          const std::vector<double>& val_losses, std::uint64_t seed);

void write_roc_csv(std::ostream& out, const RocReport& report);
void write_loss_comparison_csv(std::ostream& out, const LossComparison& c);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);

}  // namespace ghostdet::eval
