#include "ghostdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ghostdet/trace_io.hpp"

namespace ghostdet::eval {

RocReport roc_curve(const std::vector<double>& scores_normal, const std::vector<double>& scores_anom) {
  if (scores_normal.empty() || scores_anom.empty()) throw std::invalid_argument("roc_curve: empty score list");
  struct Scored {
    double score;
    bool anomalous;
  };
  std::vector<Scored> all;
  all.reserve(scores_normal.size() + scores_anom.size());
  for (double s : scores_normal) all.push_back({s, false});
  for (double s : scores_anom) all.push_back({s, true});
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

  const double n_neg = static_cast<double>(scores_normal.size());
  const double n_pos = static_cast<double>(scores_anom.size());
  RocReport r;
  r.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    const double t = all[i].score;
    for (; i < all.size() && all[i].score == t; ++i) (all[i].anomalous ? tp : fp)++;
    r.points.push_back({t, static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos});
  }
  for (std::size_t k = 1; k < r.points.size(); ++k) {
    const auto& a = r.points[k - 1];
    const auto& b = r.points[k];
    r.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return r;
}

double auc_oracle(const std::vector<double>& scores_normal, const std::vector<double>& scores_anom) {
  if (scores_normal.empty() || scores_anom.empty()) throw std::invalid_argument("auc_oracle: empty score list");
  double wins = 0.0;
  for (double a : scores_anom)
    for (double n : scores_normal) wins += a > n ? 1.0 : (a == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(scores_normal.size()) * static_cast<double>(scores_anom.size()));
}

double tpr_at_fpr(const RocReport& report, double target) {
  const auto& p = report.points;
  if (p.empty()) throw std::invalid_argument("tpr_at_fpr: empty report");
  const auto j = std::upper_bound(p.begin(), p.end(), target, [](double v, const RocPoint& q) { return v < q.fpr; });
  if (j == p.begin()) return 0.0;
  const auto i = j - 1;
  if (j == p.end() || i->fpr == target) return i->tpr;
  const double w = (target - i->fpr) / (j->fpr - i->fpr);
  return i->tpr + w * (j->tpr - i->tpr);
}

namespace {

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) h -= (c / n) * std::log(c / n);
  return h;
}

std::vector<int> densify(const std::vector<int>& labels, int* classes) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int k = 0;
  for (auto& [label, id] : ids) id = k++;
  *classes = k;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

}  // namespace

double ami(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) throw std::invalid_argument("ami: labelings differ in length");
  if (labels_a.size() < 2) throw std::invalid_argument("ami: need at least two samples");
  int ka = 0, kb = 0;
  const auto a = densify(labels_a, &ka);
  const auto b = densify(labels_b, &kb);
  if (ka == 1 || kb == 1) return (ka == 1 && kb == 1) ? 1.0 : 0.0;

  const double n = static_cast<double>(a.size());
  std::vector<double> contingency(static_cast<std::size_t>(ka) * kb, 0.0);
  std::vector<double> ca(ka, 0.0), cb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    contingency[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double nij = contingency[static_cast<std::size_t>(i) * kb + j];
      if (nij > 0) mi += (nij / n) * std::log(n * nij / (ca[i] * cb[j]));
    }

  // Expected MI under the hypergeometric model of random labelings with
  // the observed marginals.
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double ai = ca[i], bj = cb[j];
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      const double base = std::lgamma(ai + 1) + std::lgamma(bj + 1) + std::lgamma(n - ai + 1) +
                          std::lgamma(n - bj + 1) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = base - std::lgamma(nij + 1) - std::lgamma(ai - nij + 1) - std::lgamma(bj - nij + 1) -
                             std::lgamma(n - ai - bj + nij + 1);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  const double h_mean = 0.5 * (entropy(ca, n) + entropy(cb, n));
  double denom = h_mean - emi;
  if (std::abs(denom) < std::numeric_limits<double>::epsilon()) denom = denom < 0 ? -std::numeric_limits<double>::epsilon() : std::numeric_limits<double>::epsilon();
  return (mi - emi) / denom;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

LossComparison compare_loss_distributions(const std::vector<double>& train_losses,
                                          const std::vector<double>& val_losses, std::uint64_t seed) {
  if (train_losses.empty() || val_losses.empty()) throw std::invalid_argument("compare_loss_distributions: empty input");
  LossComparison c;
  c.mean_train = mean(train_losses);
  c.mean_val = mean(val_losses);
  c.var_train = variance(train_losses);
  c.var_val = variance(val_losses);

  const std::size_t m = std::min(train_losses.size(), val_losses.size());
  std::mt19937_64 rng(seed);
  const auto subsample = [&](std::vector<double> v) {
    if (v.size() > m) {
      std::shuffle(v.begin(), v.end(), rng);
      v.resize(m);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  const std::vector<double> t = subsample(train_losses);
  const std::vector<double> v = subsample(val_losses);
  const auto decile = [&t, m](double x) {
    const auto below = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
    return static_cast<int>(std::min<std::size_t>(9, 10 * below / m));
  };
  std::vector<int> la(m), lb(m);
  for (std::size_t i = 0; i < m; ++i) {
    la[i] = decile(t[i]);
    lb[i] = decile(v[i]);
  }
  c.ami = m >= 2 ? ami(la, lb) : 1.0;
  return c;
}

void write_roc_csv(std::ostream& out, const RocReport& report) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : report.points)
    out << (std::isinf(p.threshold) ? std::string("inf") : trace::format_double(p.threshold)) << ','
        << trace::format_double(p.fpr) << ',' << trace::format_double(p.tpr) << '\n';
}

void write_loss_comparison_csv(std::ostream& out, const LossComparison& c) {
  out << "split,ami,mean,variance\n";
  out << "training," << trace::format_double(c.ami) << ',' << trace::format_double(c.mean_train) << ','
      << trace::format_double(c.var_train) << '\n';
  out << "validation," << trace::format_double(c.ami) << ',' << trace::format_double(c.mean_val) << ','
      << trace::format_double(c.var_val) << '\n';
}

}  // namespace ghostdet::eval
