#include "ghostdet/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace ghostdet::sim {

namespace {

struct NodeState {
  std::uint32_t id;
  Vec2 pos;
  Vec2 vel;
};

Vec2 clamp_to(Vec2 p, const Rect& r) {
  return {std::clamp(p.x, r.x0, r.x1), std::clamp(p.y, r.y0, r.y1)};
}

std::vector<NodeState> trace_snapshot(const std::vector<VehicleTrace>& traces, double t) {
  std::vector<NodeState> out;
  for (const auto& tr : traces) {
    const auto& s = tr.samples;
    if (s.empty() || t < s.front().t || t > s.back().t) continue;
    const auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TraceSample& x) { return v < x.t; });
    if (it == s.end()) {
      const Vec2 vel = s.size() > 1 ? (1.0 / (s.back().t - s[s.size() - 2].t)) * (s.back().pos - s[s.size() - 2].pos)
                                    : Vec2{};
      out.push_back({tr.node_id, s.back().pos, vel});
      continue;
    }
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = (t - a.t) / (b.t - a.t);
    out.push_back({tr.node_id, a.pos + w * (b.pos - a.pos), (1.0 / (b.t - a.t)) * (b.pos - a.pos)});
  }
  std::sort(out.begin(), out.end(), [](const NodeState& x, const NodeState& y) { return x.id < y.id; });
  return out;
}

struct TxResult {
  std::vector<trace::PacketRecord> rx;
  std::vector<std::pair<std::uint32_t, DeliveryOutcome>> outcomes;
  SimStats stats;
};

}  // namespace

std::vector<VehicleTrace> read_traces_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace csv: missing header");
  std::vector<VehicleTrace> traces;
  std::map<std::uint32_t, std::size_t> slot;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id_s, t_s, x_s, y_s;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, t_s, ',') || !std::getline(ss, x_s, ',') ||
        !std::getline(ss, y_s))
      throw std::invalid_argument("trace csv line " + std::to_string(lineno) + ": expected node_id,t,x,y");
    std::uint32_t id = 0;
    double t = 0, x = 0, y = 0;
    const auto bad = [&](const char* field) {
      return std::invalid_argument("trace csv line " + std::to_string(lineno) + ": bad " + field);
    };
    if (std::from_chars(id_s.data(), id_s.data() + id_s.size(), id).ec != std::errc()) throw bad("node_id");
    if (std::from_chars(t_s.data(), t_s.data() + t_s.size(), t).ec != std::errc()) throw bad("t");
    if (std::from_chars(x_s.data(), x_s.data() + x_s.size(), x).ec != std::errc()) throw bad("x");
    if (std::from_chars(y_s.data(), y_s.data() + y_s.size(), y).ec != std::errc()) throw bad("y");
    auto [it, inserted] = slot.emplace(id, traces.size());
    if (inserted) traces.push_back({id, {}});
    traces[it->second].samples.push_back({t, {x, y}});
  }
  return traces;
}

void validate_traces(const std::vector<VehicleTrace>& traces, const Scenario& scenario) {
  for (const auto& tr : traces) {
    const std::string who = "trace of node " + std::to_string(tr.node_id);
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const auto& s = tr.samples[i];
      if (i > 0 && !(s.t > tr.samples[i - 1].t))
        throw std::invalid_argument(who + ": timestamps must be strictly increasing");
      if (!scenario.grid.area.contains_closed(s.pos)) throw std::invalid_argument(who + ": position outside area");
      if (scenario.obstacles.inside_any(s.pos)) throw std::invalid_argument(who + ": position inside an obstacle");
    }
  }
}

DeliveryOutcome evaluate_link(Vec2 p_tx, Vec2 p_rx, const ChannelParams& params, const ObstacleIndex& obstacles,
                              std::uint32_t packet_bits, std::uint64_t event_seed, bool* distance_clamped) {
  SplitMix64 rng(event_seed);
  const double gain = sample_rician_gain(params.rician_k_db, rng);
  const double noise = params.noise_mean_dbm + params.noise_std_db * standard_normal(rng);
  const double u = uniform01(rng);
  RssiSample s = link_budget(p_tx, p_rx, params, 0.0, gain);
  if (distance_clamped) *distance_clamped = s.distance_clamped;
  if (s.rssi_dbm >= params.sensitivity_dbm) {
    s.rssi_dbm -= obstacles.loss(p_tx, p_rx, s.rssi_dbm - params.sensitivity_dbm);
  }
  return decide_delivery(s.rssi_dbm, noise, u, params, packet_bits);
}

SimStats run_simulation(const ScenarioConfig& config, const ChannelParams& params, const RecordSink& sink,
                        const SimOptions& options) {
  params.validate();
  Scenario scenario = build_scenario(config);
  if (options.traces) validate_traces(*options.traces, scenario);

  const std::uint64_t channel_seed = derive_seed(config.seed, "channel");
  const std::uint32_t bits = config.packet_bits();
  const double airtime = airtime_s(params, bits);
  const auto steps = static_cast<std::uint64_t>(std::floor(config.sim_duration_s / config.beacon_interval_s + 1e-9));
  const unsigned threads =
      std::max(1U, options.threads ? options.threads : std::thread::hardware_concurrency());

  std::vector<std::string> iface;
  const auto iface_of = [&iface](std::uint32_t id) -> const std::string& {
    if (id >= iface.size()) {
      const std::size_t old = iface.size();
      iface.resize(id + 1);
      for (std::size_t k = old; k <= id; ++k) iface[k] = interface_id(static_cast<std::uint32_t>(k));
    }
    return iface[id];
  };

  SimStats stats;
  std::uint64_t sequence = 0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * config.beacon_interval_s;
    std::vector<NodeState> nodes;
    if (options.traces) {
      nodes = trace_snapshot(*options.traces, t);
    } else {
      nodes.reserve(scenario.vehicles.size());
      for (const auto& v : scenario.vehicles) nodes.push_back({v.node_id, scenario.position(v), scenario.velocity(v)});
    }
    for (const auto& n : nodes) iface_of(n.id);
    const std::string signal = "UDPData-" + std::to_string(k);
    const std::uint64_t first_seq = sequence;
    sequence += nodes.size();

    std::vector<TxResult> results(nodes.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t ti = begin; ti < end; ++ti) {
        const NodeState& tx = nodes[ti];
        TxResult& res = results[ti];
        const std::uint64_t seq = first_seq + ti;
        for (const NodeState& rx : nodes) {
          if (rx.id == tx.id) continue;
          bool clamped = false;
          const DeliveryOutcome out = evaluate_link(tx.pos, rx.pos, params, scenario.obstacles, bits,
                                                    derive_seed(channel_seed, seq, rx.id), &clamped);
          SimStats& st = res.stats;
          ++st.evaluations;
          st.clamped_distance += clamped;
          switch (out.verdict) {
            case Verdict::Delivered: ++st.delivered; break;
            case Verdict::BelowSensitivity: ++st.below_sensitivity; break;
            case Verdict::BelowSnir: ++st.below_snir; break;
            case Verdict::PerDrop: ++st.per_drop; break;
          }
          const bool ok =
              (out.verdict == Verdict::BelowSensitivity && out.rssi_dbm < params.sensitivity_dbm) ||
              (out.verdict == Verdict::BelowSnir && out.rssi_dbm >= params.sensitivity_dbm &&
               out.snir_db < params.snir_threshold_db) ||
              ((out.verdict == Verdict::Delivered || out.verdict == Verdict::PerDrop) &&
               out.snir_db >= params.snir_threshold_db);
          st.invariant_violations += !ok;
          if (options.on_outcome) res.outcomes.emplace_back(rx.id, out);
          if (out.verdict != Verdict::Delivered) continue;
          const double delay = distance(tx.pos, rx.pos) / kSpeedOfLight;
          trace::PacketRecord r;
          r.side = trace::Side::RX;
          r.interface_id = iface[rx.id];
          r.node_id = rx.id;
          r.signal_name = signal;
          r.sequence_no = seq;
          r.start_time = t + delay;
          r.start_pos = clamp_to(rx.pos + delay * rx.vel, config.area());
          r.end_time = r.start_time + airtime;
          r.end_pos = clamp_to(rx.pos + (delay + airtime) * rx.vel, config.area());
          r.rssi = out.rssi_dbm;
          res.rx.push_back(std::move(r));
        }
      }
    };
    if (threads == 1 || nodes.size() < 2) {
      work(0, nodes.size());
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (nodes.size() + threads - 1) / threads;
      for (std::size_t b = 0; b < nodes.size(); b += chunk) pool.emplace_back(work, b, std::min(nodes.size(), b + chunk));
    }

    for (std::size_t ti = 0; ti < nodes.size(); ++ti) {
      const NodeState& tx = nodes[ti];
      trace::PacketRecord r;
      r.side = trace::Side::TX;
      r.interface_id = iface[tx.id];
      r.node_id = tx.id;
      r.signal_name = signal;
      r.sequence_no = first_seq + ti;
      r.start_time = t;
      r.start_pos = tx.pos;
      r.end_time = t + airtime;
      r.end_pos = clamp_to(tx.pos + airtime * tx.vel, config.area());
      sink(r);
      ++stats.tx_records;
      for (const auto& rx : results[ti].rx) sink(rx);
      if (options.on_outcome)
        for (const auto& [rx_id, out] : results[ti].outcomes) options.on_outcome(tx.id, rx_id, out);
      const SimStats& st = results[ti].stats;
      stats.evaluations += st.evaluations;
      stats.delivered += st.delivered;
      stats.below_sensitivity += st.below_sensitivity;
      stats.below_snir += st.below_snir;
      stats.per_drop += st.per_drop;
      stats.clamped_distance += st.clamped_distance;
      stats.invariant_violations += st.invariant_violations;
    }
    if (!options.traces) advance_mobility(scenario, config.beacon_interval_s);
  }
  return stats;
}

trace::PacketLog run_simulation(const ScenarioConfig& config, const ChannelParams& params, SimStats* stats,
                                const SimOptions& options) {
  trace::PacketLog log;
  const SimStats s = run_simulation(config, params, [&log](const trace::PacketRecord& r) { log.push_back(r); }, options);
  if (stats) *stats = s;
  return log;
}

}  // namespace ghostdet::sim
