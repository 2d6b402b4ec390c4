#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ghostdet/channel.hpp"
#include "ghostdet/rng.hpp"

using namespace ghostdet;
using namespace ghostdet::sim;

namespace {

double budget_closed_form(double d, const ChannelParams& p) {
  const double fspl_d0 = 20.0 * std::log10(4.0 * M_PI * p.reference_distance_m * p.carrier_freq_hz / kSpeedOfLight);
  const double pl = fspl_d0 + 10.0 * p.path_loss_exponent * std::log10(d / p.reference_distance_m);
  return p.tx_power_dbm + p.antenna_gain_tx_dbi + p.antenna_gain_rx_dbi - p.cable_loss_db - pl;
}

}  // namespace

TEST_CASE("path loss at the reference distance is free-space loss") {
  ChannelParams p;
  CHECK(std::abs(path_loss_det(1.0, p) - 47.86) <= 0.01);
  CHECK(path_loss_det(p.reference_distance_m, p) == free_space_loss(p.reference_distance_m, p.carrier_freq_hz));
}

TEST_CASE("path loss at 100 m adds 48 dB for alpha 2.4") {
  ChannelParams p;
  CHECK(std::abs(path_loss_det(100.0, p) - 95.86) <= 0.01);
  CHECK(path_loss_det(100.0, p) - path_loss_det(1.0, p) == doctest::Approx(48.0).epsilon(1e-12));
}

TEST_CASE("sub-reference distances are evaluated at d0") {
  ChannelParams p;
  CHECK(path_loss_det(0.25, p) == path_loss_det(1.0, p));
  CHECK(path_loss_det(0.0, p) == path_loss_det(1.0, p));
}

TEST_CASE("Rician gain") {
  SUBCASE("infinite K gives exactly 1") {
    SplitMix64 g(3);
    for (int i = 0; i < 100; ++i) CHECK(sample_rician_gain(std::numeric_limits<double>::infinity(), g) == 1.0);
  }
  SUBCASE("unit mean at K = 8 dB") {
    SplitMix64 g(11);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += sample_rician_gain(8.0, g);
    CHECK(std::abs(sum / n - 1.0) < 0.01);
  }
  SUBCASE("same seed gives the same sequence") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(sample_rician_gain(8.0, a) == sample_rician_gain(8.0, b));
  }
  SUBCASE("gain is never negative") {
    SplitMix64 g(5);
    for (int i = 0; i < 10000; ++i) CHECK(sample_rician_gain(0.0, g) >= 0.0);
  }
}

TEST_CASE("obstacle loss") {
  const std::vector<Obstacle> none;
  CHECK(obstacle_loss({0, 0}, {100, 0}, none) == 0.0);

  const std::vector<Obstacle> one{{Rect{40, -10, 60, 10}, 6.0, 1.0}};
  SUBCASE("path through a 20 m deep building costs 2 walls plus 20 m") {
    CHECK(obstacle_loss({0, 0}, {100, 0}, one) == doctest::Approx(32.0).epsilon(1e-12));
    const Crossing c = segment_crossing({0, 0}, {100, 0}, one[0].bounds);
    CHECK(c.walls == 2);
    CHECK(c.inside_length_m == doctest::Approx(20.0));
  }
  SUBCASE("tangent path does not cross") {
    CHECK(obstacle_loss({0, 10}, {100, 10}, one) == 0.0);
    CHECK(obstacle_loss({40, -50}, {40, 50}, one) == 0.0);
    CHECK(obstacle_loss({30, -20}, {40, -10}, one) == 0.0);
  }
  SUBCASE("endpoint inside counts one wall") {
    const Crossing c = segment_crossing({50, 0}, {100, 0}, one[0].bounds);
    CHECK(c.walls == 1);
    CHECK(c.inside_length_m == doctest::Approx(10.0));
  }
  SUBCASE("path that misses the rectangle") {
    CHECK(obstacle_loss({0, 20}, {100, 30}, one) == 0.0);
  }
  SUBCASE("diagonal path length") {
    const Crossing c = segment_crossing({30, -20}, {70, 20}, one[0].bounds);
    CHECK(c.walls == 2);
    CHECK(c.inside_length_m == doctest::Approx(std::sqrt(800.0)));
  }
}

TEST_CASE("obstacle index agrees with the brute-force sum") {
  std::vector<Obstacle> obs;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      obs.push_back({Rect{i * 100.0 + 10, j * 100.0 + 10, i * 100.0 + 90, j * 100.0 + 90}, 6.0, 1.0});
  const ObstacleIndex index(obs, Rect{0, 0, 1000, 1000}, 50.0);
  SplitMix64 g(9);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 p{uniform01(g) * 1000, uniform01(g) * 1000};
    const Vec2 q{uniform01(g) * 1000, uniform01(g) * 1000};
    CHECK(index.loss(p, q) == doctest::Approx(obstacle_loss(p, q, obs)).epsilon(1e-12));
  }
  CHECK(index.inside_any({50, 50}));
  CHECK_FALSE(index.inside_any({5, 50}));
  CHECK_FALSE(index.inside_any({10, 50}));
}

TEST_CASE("obstacle index cap stops early but stays above the cap") {
  std::vector<Obstacle> obs;
  for (int i = 0; i < 10; ++i) obs.push_back({Rect{i * 100.0 + 10, -10, i * 100.0 + 90, 10}, 6.0, 1.0});
  const ObstacleIndex index(obs, Rect{0, -100, 1000, 100}, 50.0);
  const double full = index.loss({0, 0}, {1000, 0});
  CHECK(full == doctest::Approx(10 * (12.0 + 80.0)));
  const double capped = index.loss({0, 0}, {1000, 0}, 100.0);
  CHECK(capped > 100.0);
  CHECK(capped <= full);
}

TEST_CASE("link budget") {
  ChannelParams p;
  SUBCASE("100 m, no obstacle, fading pinned") {
    const auto s = link_budget({0, 0}, {100, 0}, p, 0.0, 1.0);
    CHECK(std::abs(s.rssi_dbm - (-53.86)) <= 0.01);
  }
  SUBCASE("32 dB obstacle") {
    const auto s = link_budget({0, 0}, {100, 0}, p, 32.0, 1.0);
    CHECK(std::abs(s.rssi_dbm - (-85.86)) <= 0.01);
  }
  SUBCASE("closed form to 1e-9 dB over [d0, 3000 m]") {
    for (double d = 1.0; d <= 3000.0; d *= 1.07)
      CHECK(std::abs(link_budget({0, 0}, {d, 0}, p, 0.0, 1.0).rssi_dbm - budget_closed_form(d, p)) < 1e-9);
  }
  SUBCASE("monotone in distance") {
    double prev = link_budget({0, 0}, {1, 0}, p, 0.0, 1.0).rssi_dbm;
    for (double d = 1.5; d < 3000.0; d *= 1.1) {
      const double r = link_budget({0, 0}, {d, 0}, p, 0.0, 1.0).rssi_dbm;
      CHECK(r < prev);
      prev = r;
    }
  }
  SUBCASE("fading gain enters as 10 log10") {
    const double a = link_budget({0, 0}, {100, 0}, p, 0.0, 1.0).rssi_dbm;
    const double b = link_budget({0, 0}, {100, 0}, p, 0.0, 10.0).rssi_dbm;
    CHECK(b - a == doctest::Approx(10.0));
  }
  SUBCASE("compute_rssi with obstacles") {
    const std::vector<Obstacle> one{{Rect{40, -10, 60, 10}, 6.0, 1.0}};
    SplitMix64 a(1), b(1);
    const auto s = compute_rssi({0, 0}, {100, 0}, p, one, a);
    const double gain = sample_rician_gain(p.rician_k_db, b);
    CHECK(s.obstacle_loss_db == doctest::Approx(32.0));
    CHECK(s.rssi_dbm == doctest::Approx(budget_closed_form(100, p) - 32.0 + 10 * std::log10(gain)));
  }
}

TEST_CASE("delivery cascade") {
  ChannelParams p;
  const std::uint32_t bits = 1120;
  CHECK(decide_delivery(-90.0, -110.0, 0.5, p, bits).verdict == Verdict::BelowSensitivity);
  CHECK(decide_delivery(-85.0, -92.0, 0.5, p, bits).verdict == Verdict::BelowSnir);
  const auto good = decide_delivery(-60.0, -110.0, 0.0, p, bits);
  CHECK(good.verdict == Verdict::Delivered);
  CHECK(good.snir_db == doctest::Approx(50.0));
  CHECK(good.per < 1e-12);

  SUBCASE("PER decides between delivered and dropped") {
    const double snir = 7.5;
    ChannelParams q = p;
    q.snir_threshold_db = 0.0;
    q.sensitivity_dbm = -120.0;
    const double per = packet_error_rate(snir, bits);
    REQUIRE(per > 0.01);
    REQUIRE(per < 0.99);
    CHECK(decide_delivery(-100.0, -107.5, per / 2, q, bits).verdict == Verdict::PerDrop);
    CHECK(decide_delivery(-100.0, -107.5, per, q, bits).verdict == Verdict::Delivered);
    CHECK(decide_delivery(-100.0, -107.5, 1.0 - 1e-12, q, bits).verdict == Verdict::Delivered);
  }
  SUBCASE("Q function and BER") {
    CHECK(q_function(0.0) == doctest::Approx(0.5));
    CHECK(q_function(1.0) == doctest::Approx(0.158655253931457));
    CHECK(qpsk_ber(0.0) == doctest::Approx(q_function(std::sqrt(2.0))));
    CHECK(packet_error_rate(50.0, bits) < 1e-12);
    CHECK(packet_error_rate(-10.0, bits) == doctest::Approx(1.0));
  }
  SUBCASE("delivery rate is non-increasing in distance without obstacles") {
    double prev_rate = 1.0;
    for (double d = 100; d <= 4000; d += 300) {
      int ok = 0;
      const int trials = 10000;
      for (int t = 0; t < trials; ++t) {
        SplitMix64 g(derive_seed(77, static_cast<std::uint64_t>(t)));
        const auto s = compute_rssi({0, 0}, {d, 0}, p, std::span<const Obstacle>{}, g);
        if (delivery_decision(s.rssi_dbm, p, bits, g).verdict == Verdict::Delivered) ++ok;
      }
      const double rate = static_cast<double>(ok) / trials;
      CHECK(rate <= prev_rate + 1e-12);
      prev_rate = rate;
    }
    CHECK(prev_rate < 0.05);
  }
}

TEST_CASE("channel parameter validation names the field") {
  ChannelParams p;
  p.path_loss_exponent = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("path_loss_exponent"), std::invalid_argument);
}
