#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ghostdet/eval.hpp"
#include "ghostdet/rng.hpp"

using namespace ghostdet;
using namespace ghostdet::eval;

TEST_CASE("ROC AUC examples") {
  CHECK(roc_curve({0.1, 0.2}, {0.3, 0.4}).auc == 1.0);
  CHECK(roc_curve({0.1, 0.3}, {0.2, 0.4}).auc == 0.75);
  CHECK(roc_curve({0.5, 0.1, 0.9}, {0.9, 0.5, 0.1}).auc == 0.5);
  CHECK(roc_curve({0.3, 0.4}, {0.1, 0.2}).auc == 0.0);
}

TEST_CASE("ROC curve shape") {
  const RocReport r = roc_curve({0.1, 0.3, 0.3}, {0.3, 0.5});
  REQUIRE(r.points.size() >= 2);
  CHECK(r.points.front().fpr == 0.0);
  CHECK(r.points.front().tpr == 0.0);
  CHECK(std::isinf(r.points.front().threshold));
  CHECK(r.points.back().fpr == 1.0);
  CHECK(r.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
    CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
    CHECK(r.points[i].threshold < r.points[i - 1].threshold);
  }
  // the tied 0.3 group moves both rates in one step
  CHECK(r.points.size() == 4);
}

TEST_CASE("pairwise oracle") {
  CHECK(auc_oracle({0.1, 0.3}, {0.2, 0.4}) == 0.75);
  CHECK(auc_oracle({1, 1, 1}, {1, 1}) == 0.5);
  CHECK(auc_oracle({0.1}, {0.2}) == 1.0);
  CHECK(roc_curve({1, 1, 1}, {1, 1}).auc == 0.5);

  std::mt19937_64 g(77);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(g() % 200);
    const int a = 1 + static_cast<int>(g() % 200);
    const int levels = 2 + static_cast<int>(g() % 50);
    std::vector<double> sn(n), sa(a);
    for (auto& v : sn) v = static_cast<double>(g() % levels) / levels;
    for (auto& v : sa) v = static_cast<double>(g() % levels) / levels + 0.1 * uniform01(g) * (k % 2);
    CHECK(std::abs(roc_curve(sn, sa).auc - auc_oracle(sn, sa)) <= 1e-12);
  }
  CHECK_THROWS(roc_curve({}, {1.0}));
}

TEST_CASE("TPR at a target FPR") {
  RocReport perfect = roc_curve({0.1, 0.2}, {0.8, 0.9});
  for (double f : {0.01, 0.2, 0.5, 1.0}) CHECK(tpr_at_fpr(perfect, f) == 1.0);

  RocReport piecewise;
  piecewise.points = {{1e9, 0.0, 0.0}, {0.5, 0.1, 0.5}, {0.2, 0.3, 0.9}, {0.0, 1.0, 1.0}};
  CHECK(tpr_at_fpr(piecewise, 0.2) == doctest::Approx(0.7));

  std::vector<double> sn, sa;
  std::mt19937_64 g(5);
  for (int i = 0; i < 20000; ++i) {
    sn.push_back(uniform01(g));
    sa.push_back(uniform01(g));
  }
  const RocReport random = roc_curve(sn, sa);
  CHECK(std::abs(random.auc - 0.5) < 0.02);
  CHECK(std::abs(tpr_at_fpr(random, 0.2) - 0.2) < 0.02);
}

TEST_CASE("adjusted mutual information") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2, 3, 3};
  CHECK(ami(a, a) == doctest::Approx(1.0));
  CHECK(ami(a, {5, 5, 7, 7, 1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(ami(a, std::vector<int>(8, 4)) == 0.0);
  CHECK(ami(std::vector<int>(8, 1), std::vector<int>(8, 4)) == 1.0);

  // reference values: arithmetic-mean normalisation, hypergeometric expected MI
  CHECK(ami({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}) == doctest::Approx(0.2987924581708901).epsilon(1e-9));
  CHECK(ami({0, 0, 1, 1}, {0, 0, 1, 2}) == doctest::Approx(0.5714285714285715).epsilon(1e-9));
  CHECK(ami({0, 0, 1, 1, 2, 2, 3, 3}, {0, 1, 1, 2, 2, 3, 3, 0}) == doctest::Approx(-0.16666666666666785).epsilon(1e-9));

  std::mt19937_64 g(4);
  std::vector<int> x(1000), y(1000);
  for (int i = 0; i < 1000; ++i) {
    x[i] = static_cast<int>(g() % 10);
    y[i] = static_cast<int>(g() % 10);
  }
  CHECK(std::abs(ami(x, y)) < 0.05);
  CHECK_THROWS(ami({0, 1}, {0}));
}

TEST_CASE("loss distribution comparison") {
  std::mt19937_64 g(2);
  std::vector<double> train(4000);
  for (auto& v : train) v = 0.01 + 0.002 * standard_normal(g);

  const LossComparison same = compare_loss_distributions(train, train, 1);
  CHECK(same.ami == doctest::Approx(1.0));
  CHECK(same.mean_train == doctest::Approx(mean(train)));
  CHECK(same.var_train == doctest::Approx(variance(train)));

  std::vector<double> sorted = train;
  std::sort(sorted.begin(), sorted.end());
  const double width = sorted[3599] - sorted[399];
  std::vector<double> shifted = train;
  for (auto& v : shifted) v += 10 * width;
  const LossComparison moved = compare_loss_distributions(train, shifted, 1);
  CHECK(moved.ami < 0.5);
  CHECK(moved.mean_val == doctest::Approx(mean(train) + 10 * width));

  std::vector<double> val(4000);
  for (auto& v : val) v = 0.01 + 0.002 * standard_normal(g);
  const LossComparison fresh = compare_loss_distributions(train, val, 3);
  CHECK(fresh.ami > 0.75);
  CHECK(fresh.ami > moved.ami + 0.5);
  CHECK(compare_loss_distributions(train, val, 3).ami == fresh.ami);
}

TEST_CASE("mean and unbiased variance") {
  CHECK(mean({1, 2, 3, 4}) == 2.5);
  CHECK(variance({1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("csv writers") {
  RocReport r = roc_curve({0.1, 0.3}, {0.2, 0.4});
  std::ostringstream out;
  write_roc_csv(out, r);
  CHECK(out.str().rfind("threshold,fpr,tpr\ninf,0,0\n", 0) == 0);
  std::ostringstream cmp;
  write_loss_comparison_csv(cmp, LossComparison{1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(cmp.str().rfind("split,ami,mean,variance\n", 0) == 0);
}

TEST_CASE("invariants") {
  std::mt19937_64 g(31);
  for (int k = 0; k < 20; ++k) {
    std::vector<int> a(300), b(300);
    for (int i = 0; i < 300; ++i) {
      a[i] = static_cast<int>(g() % 6);
      b[i] = (a[i] + static_cast<int>(g() % 3)) % 7;
    }
    CHECK(ami(a, b) == doctest::Approx(ami(b, a)).epsilon(1e-12));
    std::vector<int> renamed = a;
    for (int& v : renamed) v = 40 - 3 * v;
    CHECK(ami(renamed, b) == doctest::Approx(ami(a, b)).epsilon(1e-12));

    std::vector<double> sn(200), sa(150);
    for (auto& v : sn) v = uniform01(g);
    for (auto& v : sa) v = uniform01(g) + 0.3;
    const RocReport r = roc_curve(sn, sa);
    double prev = 0.0;
    for (double f = 0.0; f <= 1.0; f += 0.01) {
      const double t = tpr_at_fpr(r, f);
      CHECK(t >= prev);
      prev = t;
    }
  }
}
