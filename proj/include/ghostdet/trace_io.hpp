#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ghostdet/geometry.hpp"

namespace ghostdet::trace {

enum class Side : std::uint8_t { TX, RX };

/// One TX or RX log entry. On the wire:
///
///   interface_id node_id signal_name sequence_no start_time x y end_time x y [rssi]
///
/// e.g. `Scenario.node[1].wlan[0].radio 1 UDPData-50 1027 50 ...`. RX lines
/// carry the trailing RSSI (dBm), TX lines do not.
struct PacketRecord {
  Side side = Side::TX;
  std::string interface_id;
  std::uint32_t node_id = 0;
  std::string signal_name;
  std::uint64_t sequence_no = 0;
  double start_time = 0.0;
  Vec2 start_pos;
  double end_time = 0.0;
  Vec2 end_pos;
  double rssi = 0.0;  ///< RX only

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

using PacketLog = std::vector<PacketRecord>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, std::size_t column, const std::string& detail);
  const std::string& field() const { return field_; }
  std::size_t column() const { return column_; }

 private:
  std::string field_;
  std::size_t column_;
};

class ReconcileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string write_record(const PacketRecord& record);
PacketRecord parse_record(std::string_view line);

void write_log(std::ostream& out, const PacketLog& log);
PacketLog read_log(std::istream& in);

struct LinkedPacket {
  PacketRecord tx;
  PacketRecord rx;
};

/// Key under which TX and RX records are matched.
struct PacketKey {
  std::string signal_name;
  std::uint64_t sequence_no = 0;
  friend bool operator==(const PacketKey&, const PacketKey&) = default;
};

struct PacketKeyHash {
  std::size_t operator()(const PacketKey& k) const;
};

/// Incremental reconciliation: TX records are registered as they arrive and
/// each RX record is linked to its TX. RX records may only follow their TX.
class Reconciler {
 public:
  void add_tx(const PacketRecord& tx);
  /// Throws ReconcileError if no TX with the same key was registered.
  const PacketRecord& match(const PacketRecord& rx) const;
  std::size_t tx_count() const { return tx_.size(); }

 private:
  std::unordered_map<PacketKey, PacketRecord, PacketKeyHash> tx_;
};

struct ReconcileStats {
  std::size_t tx_records = 0;
  std::size_t rx_records = 0;
  std::size_t linked = 0;
  std::size_t unmatched_tx = 0;
};

/// Links every RX record to its TX record. A TX with no RX is a lost packet
/// and is allowed; an RX without TX or a duplicated TX key throws.
std::vector<LinkedPacket> reconcile(const PacketLog& log, ReconcileStats* stats = nullptr);

enum class Label : std::uint8_t { Normal, Anomalous };

/// Detector sample [l_R, rssi, l_T]. For anomalous samples `tx_reported`
/// holds the ghost location and `tx_true` the real transmitter position.
struct FeatureVector {
  Vec2 rx;
  double rssi = 0.0;
  Vec2 tx_reported;
  Label label = Label::Normal;
  double d_true = 0.0;  ///< true TX-RX distance, diagnostics only
  Vec2 tx_true;

  std::array<double, 5> flatten() const { return {rx.x, rx.y, rssi, tx_reported.x, tx_reported.y}; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector extract_features(const LinkedPacket& lp);
FeatureVector extract_features(const PacketRecord& tx, const PacketRecord& rx);

/// Per-dimension min-max scaler fitted on training data.
struct Scaler {
  std::array<double, 5> min{};
  std::array<double, 5> max{};

  /// Maps into [0, 1] on the fitted range, extrapolating linearly outside it.
  std::array<double, 5> apply(const std::array<double, 5>& x) const;
  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Throws std::invalid_argument listing the degenerate dimensions.
Scaler fit_scaler(const std::vector<FeatureVector>& data);
std::array<double, 5> apply_scaler(const Scaler& s, const FeatureVector& x);

struct Split {
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> validation;
};

/// Seeded uniform random split; round(ratio * n) samples go to train.
Split split(const std::vector<FeatureVector>& data, double ratio, std::uint64_t seed);

/// Feature CSV: `x_r,y_r,rssi,x_t,y_t,label,d_true`. With `with_truth` the
/// columns `x_t_true,y_t_true,d_tt` are appended (used for anomaly sets).
void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& rows, bool with_truth);
std::vector<FeatureVector> read_features_csv(std::istream& in);

}  // namespace ghostdet::trace
