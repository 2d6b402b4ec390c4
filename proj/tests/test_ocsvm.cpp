#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ghostdet/ocsvm.hpp"
#include "ghostdet/rng.hpp"

using namespace ghostdet;
using namespace ghostdet::ocsvm;

namespace {

std::vector<Sample> cloud(std::size_t n, std::uint64_t seed, double spread) {
  std::mt19937_64 g(seed);
  std::vector<Sample> out(n);
  for (auto& s : out)
    for (int j = 0; j < 5; ++j) s[j] = 0.5 + spread * (uniform01(g) - 0.5) + 0.1 * j;
  return out;
}

}  // namespace

TEST_CASE("nu-property on training data") {
  for (double nu : {0.05, 0.1, 0.3}) {
    const auto data = cloud(2000, 7, 0.6);
    OcsvmConfig cfg;
    cfg.nu = nu;
    cfg.seed = 3;
    const OcsvmModel m = train_ocsvm(data, cfg);
    const double frac = outlier_fraction(m, data);
    CAPTURE(nu);
    CHECK(frac <= nu + 0.05);
    CHECK(frac >= nu - 0.05);
    CHECK(m.nu == nu);
  }
}

TEST_CASE("tight cluster versus a far outlier") {
  const auto data = cloud(500, 1, 0.01);
  OcsvmConfig cfg;
  cfg.seed = 1;
  const OcsvmModel m = train_ocsvm(data, cfg);
  double worst = 0;
  for (const auto& s : data) worst = std::max(worst, std::abs(score_ocsvm(m, s)));
  CHECK(worst < 0.05);
  const Sample far{-5, -5, -5, -5, -5};
  CHECK(score_ocsvm(m, far) > 1.0);
  CHECK(score_ocsvm(m, far) > 20 * worst);
}

TEST_CASE("determinism and score properties") {
  const auto data = cloud(800, 4, 0.5);
  OcsvmConfig cfg;
  cfg.seed = 9;
  const OcsvmModel a = train_ocsvm(data, cfg);
  CHECK(train_ocsvm(data, cfg) == a);

  const Sample y1{0.1, 0.7, 0.3, 0.9, 0.2};
  const Sample y2{0.6, 0.2, 0.8, 0.1, 0.5};
  for (double alpha : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    Sample mix;
    for (int j = 0; j < 5; ++j) mix[j] = alpha * y1[j] + (1 - alpha) * y2[j];
    CHECK(score_ocsvm(a, mix) ==
          doctest::Approx(alpha * score_ocsvm(a, y1) + (1 - alpha) * score_ocsvm(a, y2)).epsilon(1e-12));
  }

  int inside = 0;
  for (const auto& s : data) {
    double dot = 0;
    for (int j = 0; j < 5; ++j) dot += a.w[j] * s[j];
    CHECK((dot < a.rho) == (score_ocsvm(a, s) > 0));
    if (dot >= a.rho) {
      CHECK(score_ocsvm(a, s) <= 0.0);
      ++inside;
    }
  }
  CHECK(inside > 0);
}

TEST_CASE("objective") {
  OcsvmModel m;
  m.w = {1, 0, 0, 0, 0};
  m.rho = 0.5;
  m.nu = 0.5;
  const std::vector<Sample> data{{1, 0, 0, 0, 0}, {0, 0, 0, 0, 0}};
  // 0.5 * 1 + 1/(0.5 * 2) * (0 + 0.5) - 0.5
  CHECK(objective(m, data) == doctest::Approx(0.5));
}

TEST_CASE("training never returns a worse objective than its start") {
  const auto data = cloud(300, 2, 0.8);
  OcsvmConfig short_run;
  short_run.epochs = 5;
  short_run.seed = 5;
  OcsvmConfig long_run = short_run;
  long_run.epochs = 500;
  CHECK(objective(train_ocsvm(data, long_run), data) <= objective(train_ocsvm(data, short_run), data) + 1e-12);
}

TEST_CASE("invalid nu is rejected") {
  const auto data = cloud(10, 2, 0.8);
  OcsvmConfig cfg;
  cfg.nu = 0.0;
  CHECK_THROWS_AS(train_ocsvm(data, cfg), std::invalid_argument);
  cfg.nu = 1.5;
  CHECK_THROWS_AS(train_ocsvm(data, cfg), std::invalid_argument);
  cfg.nu = 0.1;
  CHECK_THROWS_AS(train_ocsvm({}, cfg), std::invalid_argument);
}
