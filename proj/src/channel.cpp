#include "ghostdet/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ghostdet::sim {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("channel.") + field + ": " + what);
}

}  // namespace

void ChannelParams::validate() const {
  require(carrier_freq_hz > 0, "carrier_freq", "must be > 0");
  require(reference_distance_m > 0, "reference_distance", "must be > 0");
  require(noise_std_db >= 0, "noise_std", "must be >= 0");
  require(path_loss_exponent > 0, "path_loss_exponent", "must be > 0");
  require(bitrate_bps > 0, "bitrate", "must be > 0");
  require(preamble_s >= 0, "preamble", "must be >= 0");
  require(!std::isnan(rician_k_db), "rician_k", "must be a number");
}

double free_space_loss(double distance_m, double freq_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * freq_hz / kSpeedOfLight);
}

double path_loss_det(double distance_m, const ChannelParams& params) {
  const double d0 = params.reference_distance_m;
  const double d = std::max(distance_m, d0);
  return free_space_loss(d0, params.carrier_freq_hz) +
         10.0 * params.path_loss_exponent * std::log10(d / d0);
}

Crossing segment_crossing(Vec2 p, Vec2 q, const Rect& rect) {
  // Liang-Barsky against the open rectangle.
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const double pk[4] = {-dx, dx, -dy, dy};
  const double qk[4] = {p.x - rect.x0, rect.x1 - p.x, p.y - rect.y0, rect.y1 - p.y};
  for (int k = 0; k < 4; ++k) {
    if (pk[k] == 0.0) {
      if (qk[k] <= 0.0) return {};
      continue;
    }
    const double r = qk[k] / pk[k];
    if (pk[k] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (!(t1 > t0)) return {};
  const double length = std::hypot(dx, dy);
  Crossing c;
  c.inside_length_m = (t1 - t0) * length;
  if (c.inside_length_m <= 0.0) return {};
  if (!rect.contains_open(p)) ++c.walls;
  if (!rect.contains_open(q)) ++c.walls;
  return c;
}

double obstacle_loss(Vec2 p, Vec2 q, std::span<const Obstacle> obstacles) {
  double loss = 0.0;
  for (const auto& ob : obstacles) {
    const Crossing c = segment_crossing(p, q, ob.bounds);
    loss += c.walls * ob.wall_loss_db + c.inside_length_m * ob.interior_loss_db_per_m;
  }
  return loss;
}

RssiSample link_budget(Vec2 p_tx, Vec2 p_rx, const ChannelParams& params,
                       double obstacle_loss_db, double fading_gain) {
  RssiSample s;
  s.distance_m = distance(p_tx, p_rx);
  s.distance_clamped = s.distance_m < params.reference_distance_m;
  s.path_loss_db = path_loss_det(s.distance_m, params);
  s.obstacle_loss_db = obstacle_loss_db;
  s.fading_gain = fading_gain;
  s.rssi_dbm = params.tx_power_dbm + params.antenna_gain_tx_dbi + params.antenna_gain_rx_dbi -
               params.cable_loss_db - s.path_loss_db - obstacle_loss_db +
               10.0 * std::log10(fading_gain);
  return s;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Delivered: return "Delivered";
    case Verdict::BelowSensitivity: return "BelowSensitivity";
    case Verdict::BelowSnir: return "BelowSnir";
    case Verdict::PerDrop: return "PerDrop";
  }
  return "?";
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double qpsk_ber(double snir_db) {
  const double snr = std::pow(10.0, snir_db / 10.0);
  return q_function(std::sqrt(2.0 * snr));
}

double packet_error_rate(double snir_db, std::uint32_t packet_bits) {
  const double ber = qpsk_ber(snir_db);
  if (ber >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(packet_bits) * std::log1p(-ber));
}

DeliveryOutcome decide_delivery(double rssi_dbm, double noise_dbm, double uniform_draw,
                                const ChannelParams& params, std::uint32_t packet_bits) {
  DeliveryOutcome out;
  out.rssi_dbm = rssi_dbm;
  out.snir_db = rssi_dbm - noise_dbm;
  if (rssi_dbm < params.sensitivity_dbm) {
    out.verdict = Verdict::BelowSensitivity;
    return out;
  }
  if (out.snir_db < params.snir_threshold_db) {
    out.verdict = Verdict::BelowSnir;
    return out;
  }
  out.per = packet_error_rate(out.snir_db, packet_bits);
  out.verdict = uniform_draw >= out.per ? Verdict::Delivered : Verdict::PerDrop;
  return out;
}

double airtime_s(const ChannelParams& params, std::uint32_t packet_bits) {
  return params.preamble_s + static_cast<double>(packet_bits) / params.bitrate_bps;
}

ObstacleIndex::ObstacleIndex(std::vector<Obstacle> obstacles, Rect area, double cell_size)
    : obstacles_(std::move(obstacles)), area_(area), cell_(cell_size) {
  if (!(cell_ > 0)) throw std::invalid_argument("obstacle index cell size must be > 0");
  nx_ = std::max(1, static_cast<int>(std::ceil(area_.width() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(area_.height() / cell_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::uint32_t i = 0; i < obstacles_.size(); ++i) {
    const Rect& r = obstacles_[i].bounds;
    const auto [cx0, cy0] = cell_of({r.x0, r.y0});
    const auto [cx1, cy1] = cell_of({r.x1, r.y1});
    ranges_.push_back({cx0, cy0});
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx) buckets_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(i);
  }
}

std::pair<int, int> ObstacleIndex::cell_of(Vec2 p) const {
  const int cx = std::clamp(static_cast<int>(std::floor((p.x - area_.x0) / cell_)), 0, nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((p.y - area_.y0) / cell_)), 0, ny_ - 1);
  return {cx, cy};
}

double ObstacleIndex::loss(Vec2 p, Vec2 q, double cap_db) const {
  const auto [ax, ay] = cell_of(p);
  const auto [bx, by] = cell_of(q);
  const int x0 = std::min(ax, bx), x1 = std::max(ax, bx);
  const int y0 = std::min(ay, by), y1 = std::max(ay, by);
  // A path can only meet obstacles registered in the cells its bounding box
  // covers. An obstacle spanning several cells is evaluated only in the first
  // of its cells that the row-major scan visits.
  double total = 0.0;
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      for (std::uint32_t id : buckets_[static_cast<std::size_t>(cy) * nx_ + cx]) {
        const CellRange& cr = ranges_[id];
        if (cx != std::max(x0, cr.x0) || cy != std::max(y0, cr.y0)) continue;
        const Obstacle& ob = obstacles_[id];
        const Crossing c = segment_crossing(p, q, ob.bounds);
        total += c.walls * ob.wall_loss_db + c.inside_length_m * ob.interior_loss_db_per_m;
        if (total > cap_db) return total;
      }
    }
  }
  return total;
}

bool ObstacleIndex::inside_any(Vec2 p) const {
  const auto [cx, cy] = cell_of(p);
  for (std::uint32_t id : buckets_[static_cast<std::size_t>(cy) * nx_ + cx])
    if (obstacles_[id].bounds.contains_open(p)) return true;
  return false;
}

}  // namespace ghostdet::sim
