#include "ghostdet/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace ghostdet::trace {

namespace {

constexpr const char* kFieldNames[] = {"interface_id", "node_id", "signal_name", "sequence_no",
                                       "start_time",   "start_x", "start_y",     "end_time",
                                       "end_x",        "end_y",   "rssi"};
constexpr std::size_t kTxFields = 10;
constexpr std::size_t kRxFields = 11;

std::vector<std::string_view> tokenize(std::string_view line, char sep = ' ') {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == sep || line[i] == '\r' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != sep && line[j] != '\r' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view tok, std::size_t column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(kFieldNames[column - 1], column, "expected a finite number, got '" + std::string(tok) + "'");
  return v;
}

template <class T>
T to_unsigned(std::string_view tok, std::size_t column) {
  T v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(kFieldNames[column - 1], column, "expected an unsigned integer, got '" + std::string(tok) + "'");
  return v;
}

}  // namespace

ParseError::ParseError(std::string field, std::size_t column, const std::string& detail)
    : std::runtime_error("parse error in field '" + field + "' (column " + std::to_string(column) + "): " + detail),
      field_(std::move(field)),
      column_(column) {}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string write_record(const PacketRecord& r) {
  std::string line;
  line.reserve(128);
  const auto put = [&line](std::string_view s) {
    if (!line.empty()) line.push_back(' ');
    line.append(s);
  };
  put(r.interface_id);
  put(std::to_string(r.node_id));
  put(r.signal_name);
  put(std::to_string(r.sequence_no));
  put(format_double(r.start_time));
  put(format_double(r.start_pos.x));
  put(format_double(r.start_pos.y));
  put(format_double(r.end_time));
  put(format_double(r.end_pos.x));
  put(format_double(r.end_pos.y));
  if (r.side == Side::RX) put(format_double(r.rssi));
  return line;
}

PacketRecord parse_record(std::string_view line) {
  const auto tok = tokenize(line);
  if (tok.size() < kTxFields) {
    const std::size_t column = tok.size() + 1;
    throw ParseError(kFieldNames[column - 1], column, "missing field");
  }
  if (tok.size() > kRxFields) throw ParseError("end_of_record", kRxFields + 1, "unexpected extra field");
  PacketRecord r;
  r.side = tok.size() == kRxFields ? Side::RX : Side::TX;
  r.interface_id = std::string(tok[0]);
  r.node_id = to_unsigned<std::uint32_t>(tok[1], 2);
  r.signal_name = std::string(tok[2]);
  r.sequence_no = to_unsigned<std::uint64_t>(tok[3], 4);
  r.start_time = to_double(tok[4], 5);
  r.start_pos = {to_double(tok[5], 6), to_double(tok[6], 7)};
  r.end_time = to_double(tok[7], 8);
  r.end_pos = {to_double(tok[8], 9), to_double(tok[9], 10)};
  if (r.side == Side::RX) r.rssi = to_double(tok[10], 11);
  if (r.end_time < r.start_time) throw ParseError("end_time", 8, "end_time precedes start_time");
  return r;
}

void write_log(std::ostream& out, const PacketLog& log) {
  for (const auto& r : log) out << write_record(r) << '\n';
}

PacketLog read_log(std::istream& in) {
  PacketLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    try {
      log.push_back(parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError(e.field(), e.column(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

std::size_t PacketKeyHash::operator()(const PacketKey& k) const {
  return std::hash<std::string>{}(k.signal_name) ^ (std::hash<std::uint64_t>{}(k.sequence_no) * 0x9e3779b97f4a7c15ULL);
}

void Reconciler::add_tx(const PacketRecord& tx) {
  PacketKey key{tx.signal_name, tx.sequence_no};
  const auto [it, inserted] = tx_.emplace(std::move(key), tx);
  if (!inserted)
    throw ReconcileError("duplicate TX key " + tx.signal_name + " " + std::to_string(tx.sequence_no));
}

const PacketRecord& Reconciler::match(const PacketRecord& rx) const {
  const auto it = tx_.find(PacketKey{rx.signal_name, rx.sequence_no});
  if (it == tx_.end())
    throw ReconcileError("RX record " + rx.signal_name + " " + std::to_string(rx.sequence_no) +
                         " at node " + std::to_string(rx.node_id) + " has no matching TX");
  return it->second;
}

std::vector<LinkedPacket> reconcile(const PacketLog& log, ReconcileStats* stats) {
  // TX records are indexed up front so an RX may appear anywhere in the log.
  Reconciler rec;
  std::unordered_map<PacketKey, std::size_t, PacketKeyHash> rx_per_tx;
  for (const auto& r : log)
    if (r.side == Side::TX) rec.add_tx(r);
  std::vector<LinkedPacket> linked;
  std::size_t rx_records = 0;
  for (const auto& r : log) {
    if (r.side != Side::RX) continue;
    ++rx_records;
    linked.push_back({rec.match(r), r});
    ++rx_per_tx[PacketKey{r.signal_name, r.sequence_no}];
  }
  if (stats) {
    stats->tx_records = rec.tx_count();
    stats->rx_records = rx_records;
    stats->linked = linked.size();
    stats->unmatched_tx = rec.tx_count() - rx_per_tx.size();
  }
  return linked;
}

FeatureVector extract_features(const PacketRecord& tx, const PacketRecord& rx) {
  FeatureVector f;
  f.rx = rx.end_pos;
  f.rssi = rx.rssi;
  f.tx_reported = tx.start_pos;
  f.tx_true = tx.start_pos;
  f.label = Label::Normal;
  f.d_true = distance(f.rx, f.tx_true);
  return f;
}

FeatureVector extract_features(const LinkedPacket& lp) { return extract_features(lp.tx, lp.rx); }

std::array<double, 5> Scaler::apply(const std::array<double, 5>& x) const {
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = (x[i] - min[i]) / (max[i] - min[i]);
  return out;
}

Scaler fit_scaler(const std::vector<FeatureVector>& data) {
  if (data.empty()) throw std::invalid_argument("fit_scaler: empty data");
  Scaler s;
  s.min = data.front().flatten();
  s.max = s.min;
  for (const auto& f : data) {
    const auto x = f.flatten();
    for (std::size_t i = 0; i < 5; ++i) {
      s.min[i] = std::min(s.min[i], x[i]);
      s.max[i] = std::max(s.max[i], x[i]);
    }
  }
  static constexpr const char* kNames[] = {"x_r", "y_r", "rssi", "x_t", "y_t"};
  std::string degenerate;
  for (std::size_t i = 0; i < 5; ++i)
    if (!(s.max[i] > s.min[i])) degenerate += (degenerate.empty() ? "" : ", ") + std::string(kNames[i]);
  if (!degenerate.empty()) throw std::invalid_argument("fit_scaler: degenerate dimension(s): " + degenerate);
  return s;
}

std::array<double, 5> apply_scaler(const Scaler& s, const FeatureVector& x) { return s.apply(x.flatten()); }

Split split(const std::vector<FeatureVector>& data, double ratio, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("split: empty data");
  if (!(ratio >= 0 && ratio <= 1)) throw std::invalid_argument("split: ratio must be in [0, 1]");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(data.size())));
  Split out;
  out.train.reserve(n_train);
  out.validation.reserve(data.size() - n_train);
  for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? out.train : out.validation).push_back(data[idx[k]]);
  return out;
}

void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& rows, bool with_truth) {
  out << "x_r,y_r,rssi,x_t,y_t,label,d_true";
  if (with_truth) out << ",x_t_true,y_t_true,d_tt";
  out << '\n';
  for (const auto& f : rows) {
    out << format_double(f.rx.x) << ',' << format_double(f.rx.y) << ',' << format_double(f.rssi) << ','
        << format_double(f.tx_reported.x) << ',' << format_double(f.tx_reported.y) << ','
        << (f.label == Label::Normal ? "normal" : "anomalous") << ',' << format_double(f.d_true);
    if (with_truth)
      out << ',' << format_double(f.tx_true.x) << ',' << format_double(f.tx_true.y) << ','
          << format_double(distance(f.tx_true, f.tx_reported));
    out << '\n';
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("feature csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = tokenize(line, ',');
  static constexpr std::string_view kBase[] = {"x_r", "y_r", "rssi", "x_t", "y_t", "label", "d_true"};
  if (header.size() < 7 || !std::equal(std::begin(kBase), std::end(kBase), header.begin()))
    throw std::runtime_error("feature csv: unexpected header '" + line + "'");
  const bool with_truth = header.size() >= 9 && header[7] == "x_t_true" && header[8] == "y_t_true";
  std::vector<FeatureVector> rows;
  std::size_t lineno = 1;
  const auto num = [&lineno](std::string_view tok, std::string_view name) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::runtime_error("feature csv line " + std::to_string(lineno) + ": bad " + std::string(name));
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t = tokenize(line, ',');
    if (t.size() != header.size())
      throw std::runtime_error("feature csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields");
    FeatureVector f;
    f.rx = {num(t[0], "x_r"), num(t[1], "y_r")};
    f.rssi = num(t[2], "rssi");
    f.tx_reported = {num(t[3], "x_t"), num(t[4], "y_t")};
    if (t[5] == "normal") {
      f.label = Label::Normal;
    } else if (t[5] == "anomalous") {
      f.label = Label::Anomalous;
    } else {
      throw std::runtime_error("feature csv line " + std::to_string(lineno) + ": bad label");
    }
    f.d_true = num(t[6], "d_true");
    f.tx_true = with_truth ? Vec2{num(t[7], "x_t_true"), num(t[8], "y_t_true")} : f.tx_reported;
    rows.push_back(f);
  }
  return rows;
}

}  // namespace ghostdet::trace
