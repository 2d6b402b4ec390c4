#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ghostdet/geometry.hpp"
#include "ghostdet/rng.hpp"

namespace ghostdet::sim {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Radio and link-budget parameters. Defaults are the 802.11p beaconing
/// setup: 5.9 GHz, 27 dBm, 9 dBi antennas, alpha 2.4, K 8 dB.
struct ChannelParams {
  double carrier_freq_hz = 5.9e9;
  double tx_power_dbm = 27.0;
  double antenna_gain_tx_dbi = 9.0;
  double antenna_gain_rx_dbi = 9.0;
  double cable_loss_db = 3.0;
  double path_loss_exponent = 2.4;
  double rician_k_db = 8.0;
  double reference_distance_m = 1.0;
  double noise_mean_dbm = -110.0;
  double noise_std_db = 3.0;
  double sensitivity_dbm = -88.0;
  double snir_threshold_db = 10.0;
  double bandwidth_hz = 10e6;
  double bitrate_bps = 6e6;
  double preamble_s = 40e-6;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Dielectric obstacle: a building footprint with per-wall and per-meter losses.
struct Obstacle {
  Rect bounds;
  double wall_loss_db = 6.0;
  double interior_loss_db_per_m = 1.0;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Deterministic path loss: free-space loss at d0 plus 10*alpha*log10(d/d0).
/// Distances below d0 are evaluated at d0.
double path_loss_det(double distance_m, const ChannelParams& params);

/// Free-space path loss 20*log10(4*pi*d*f/c).
double free_space_loss(double distance_m, double freq_hz);

/// Rician power gain |h|^2 with unit mean. k_db = +inf gives exactly 1.
template <class Engine>
double sample_rician_gain(double k_db, Engine& engine);

/// Segment-rectangle overlap along the straight path p -> q.
struct Crossing {
  int walls = 0;
  double inside_length_m = 0.0;
};

/// Open-interval clipping: a segment that only touches an edge or a corner
/// does not cross.
Crossing segment_crossing(Vec2 p, Vec2 q, const Rect& rect);

/// Sum of wall and interior losses over all obstacles on p -> q.
double obstacle_loss(Vec2 p, Vec2 q, std::span<const Obstacle> obstacles);

struct RssiSample {
  double rssi_dbm = 0.0;
  double distance_m = 0.0;
  double path_loss_db = 0.0;
  double obstacle_loss_db = 0.0;
  double fading_gain = 1.0;
  bool distance_clamped = false;
};

/// Link budget for a fixed fading gain and precomputed obstacle loss.
RssiSample link_budget(Vec2 p_tx, Vec2 p_rx, const ChannelParams& params,
                       double obstacle_loss_db, double fading_gain);

/// RSSI with a sampled Rician gain.
template <class Engine>
RssiSample compute_rssi(Vec2 p_tx, Vec2 p_rx, const ChannelParams& params,
                        std::span<const Obstacle> obstacles, Engine& engine) {
  const double gain = sample_rician_gain(params.rician_k_db, engine);
  return link_budget(p_tx, p_rx, params, obstacle_loss(p_tx, p_rx, obstacles), gain);
}

enum class Verdict : std::uint8_t { Delivered, BelowSensitivity, BelowSnir, PerDrop };

const char* to_string(Verdict v);

struct DeliveryOutcome {
  Verdict verdict = Verdict::BelowSensitivity;
  double rssi_dbm = 0.0;
  double snir_db = 0.0;
  double per = 1.0;
};

/// Gaussian tail probability Q(x).
double q_function(double x);

/// Uncoded QPSK bit error rate at the given SNR (dB).
double qpsk_ber(double snir_db);

/// 1 - (1 - BER)^bits.
double packet_error_rate(double snir_db, std::uint32_t packet_bits);

/// Delivery cascade with the random draws supplied by the caller: the
/// sampled background noise (dBm) and a uniform draw in [0, 1).
DeliveryOutcome decide_delivery(double rssi_dbm, double noise_dbm, double uniform_draw,
                                const ChannelParams& params, std::uint32_t packet_bits);

/// Delivery cascade with noise and the PER draw sampled from `engine`.
/// The noise is drawn first, then the uniform; both are consumed even when
/// the packet is already below sensitivity so streams stay aligned.
template <class Engine>
DeliveryOutcome delivery_decision(double rssi_dbm, const ChannelParams& params,
                                  std::uint32_t packet_bits, Engine& engine) {
  const double noise = params.noise_mean_dbm + params.noise_std_db * standard_normal(engine);
  const double u = uniform01(engine);
  return decide_delivery(rssi_dbm, noise, u, params, packet_bits);
}

/// Time on air for a packet of the given size.
double airtime_s(const ChannelParams& params, std::uint32_t packet_bits);

// --- template definitions ---

template <class Engine>
double sample_rician_gain(double k_db, Engine& engine) {
  const double z1 = standard_normal(engine);
  const double z2 = standard_normal(engine);
  if (std::isinf(k_db) && k_db > 0) return 1.0;
  const double k = std::pow(10.0, k_db / 10.0);
  const double los = std::sqrt(k / (k + 1.0));
  const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  const double re = los + scatter * z1;
  const double im = scatter * z2;
  return re * re + im * im;
}

}  // namespace ghostdet::sim

namespace ghostdet::sim {

/// Uniform bucket grid over the obstacle set so that a TX->RX path only
/// tests the buildings whose cells its bounding box overlaps.
class ObstacleIndex {
 public:
  ObstacleIndex() = default;
  ObstacleIndex(std::vector<Obstacle> obstacles, Rect area, double cell_size);

  std::span<const Obstacle> obstacles() const { return obstacles_; }

  /// Same value as obstacle_loss(p, q, obstacles()), except that accumulation
  /// stops once the running total exceeds `cap_db`; the partial sum (> cap)
  /// is returned in that case.
  double loss(Vec2 p, Vec2 q, double cap_db = std::numeric_limits<double>::infinity()) const;

  /// True if p lies strictly inside any obstacle.
  bool inside_any(Vec2 p) const;

 private:
  std::pair<int, int> cell_of(Vec2 p) const;

  std::vector<Obstacle> obstacles_;
  Rect area_;
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  struct CellRange {
    int x0;
    int y0;
  };
  std::vector<CellRange> ranges_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

}  // namespace ghostdet::sim
