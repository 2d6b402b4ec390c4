#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ghostdet/channel.hpp"
#include "ghostdet/scenario.hpp"
#include "ghostdet/trace_io.hpp"

namespace ghostdet::sim {

struct TraceSample {
  double t = 0.0;
  Vec2 pos;
};

/// Time-indexed positions of one vehicle. Between samples the position is
/// interpolated linearly; outside [first, last] the vehicle is absent.
struct VehicleTrace {
  std::uint32_t node_id = 0;
  std::vector<TraceSample> samples;
};

/// Reads `node_id,t,x,y` rows (header required). Samples are grouped by node
/// in order of first appearance.
std::vector<VehicleTrace> read_traces_csv(std::istream& in);

/// Checks strictly increasing timestamps and that every sample is inside the
/// area and outside obstacle interiors. Throws std::invalid_argument.
void validate_traces(const std::vector<VehicleTrace>& traces, const Scenario& scenario);

struct SimStats {
  std::uint64_t tx_records = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t delivered = 0;
  std::uint64_t below_sensitivity = 0;
  std::uint64_t below_snir = 0;
  std::uint64_t per_drop = 0;
  std::uint64_t clamped_distance = 0;
  /// Cascade invariants violated (must stay 0).
  std::uint64_t invariant_violations = 0;
};

struct SimOptions {
  /// Replaces the built-in grid mobility when set.
  std::optional<std::vector<VehicleTrace>> traces;
  unsigned threads = 0;  ///< 0: hardware concurrency
  /// Called with every evaluated (TX, RX) outcome, in log order.
  std::function<void(std::uint32_t tx, std::uint32_t rx, const DeliveryOutcome&)> on_outcome;
};

using RecordSink = std::function<void(const trace::PacketRecord&)>;

/// Outcome of one (TX, RX, beacon) event. All randomness comes from
/// `event_seed`, so events can be evaluated in any order. When the RSSI is
/// already below sensitivity before obstacles are considered, the obstacle
/// loss is not evaluated (it can only lower the RSSI further).
DeliveryOutcome evaluate_link(Vec2 p_tx, Vec2 p_rx, const ChannelParams& params,
                              const ObstacleIndex& obstacles, std::uint32_t packet_bits,
                              std::uint64_t event_seed, bool* distance_clamped = nullptr);

/// Beacons every vehicle once per interval, evaluates every ordered
/// (TX, RX != TX) pair and streams all TX records and every delivered RX
/// record to `sink` in (time, tx, rx) order.
SimStats run_simulation(const ScenarioConfig& config, const ChannelParams& params, const RecordSink& sink,
                        const SimOptions& options = {});

/// In-memory convenience wrapper.
trace::PacketLog run_simulation(const ScenarioConfig& config, const ChannelParams& params,
                                SimStats* stats = nullptr, const SimOptions& options = {});

}  // namespace ghostdet::sim
