#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ghostdet/rng.hpp"
#include "ghostdet/simulation.hpp"
#include "ghostdet/trace_io.hpp"

using namespace ghostdet;
using namespace ghostdet::trace;

namespace {

PacketRecord tx_record() {
  PacketRecord r;
  r.side = Side::TX;
  r.interface_id = "Scenario.node[1].wlan[0].radio";
  r.node_id = 1;
  r.signal_name = "UDPData-50";
  r.sequence_no = 1027;
  r.start_time = 50.0;
  r.start_pos = {103.25, 1800.0};
  r.end_time = 50.000226;
  r.end_pos = {103.2525, 1800.0};
  return r;
}

PacketRecord rx_record(std::uint32_t node, double rssi) {
  PacketRecord r = tx_record();
  r.side = Side::RX;
  r.node_id = node;
  r.interface_id = "Scenario.node[" + std::to_string(node) + "].wlan[0].radio";
  r.start_pos = {300.0 + node, 1794.0};
  r.end_pos = {300.5 + node, 1794.0};
  r.rssi = rssi;
  return r;
}

double random_double(SplitMix64& g) {
  switch (g() % 4) {
    case 0: return (uniform01(g) - 0.5) * 1e6;
    case 1: return std::ldexp(uniform01(g), static_cast<int>(g() % 200) - 100);
    case 2: return -static_cast<double>(g() % 100000) / 7.0;
    default: return std::bit_cast<double>((g() & 0x3fefffffffffffffULL) | 0x3000000000000000ULL);
  }
}

}  // namespace

TEST_CASE("record format") {
  const PacketRecord tx = tx_record();
  const std::string line = write_record(tx);
  CHECK(line.rfind("Scenario.node[1].wlan[0].radio 1 UDPData-50 1027 50 ", 0) == 0);
  CHECK(parse_record(line) == tx);

  const PacketRecord rx = rx_record(4, -71.5);
  const std::string rx_line = write_record(rx);
  const auto fields = [](const std::string& s) {
    std::istringstream in(s);
    return std::distance(std::istream_iterator<std::string>(in), std::istream_iterator<std::string>());
  };
  CHECK(fields(rx_line) == fields(line) + 1);
  CHECK(fields(line) == 10);
  CHECK(parse_record(rx_line) == rx);
}

TEST_CASE("malformed lines name the offending field") {
  CHECK_THROWS_AS(parse_record(""), ParseError);
  std::string line = write_record(tx_record());
  line.replace(line.find(" 50 "), 4, " fifty ");
  try {
    parse_record(line);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "start_time");
  }
  CHECK_THROWS_AS(parse_record("a 1 UDPData-1 2 0 0 0 0 0 0 -50 extra"), ParseError);
  CHECK_THROWS_AS(parse_record("a 1 UDPData-1 2 0 0 0 0 0"), ParseError);
}

TEST_CASE("parse(write(r)) == r on 10^4 fuzzed records") {
  SplitMix64 g(2024);
  for (int i = 0; i < 10000; ++i) {
    PacketRecord r;
    r.side = g() % 2 ? Side::TX : Side::RX;
    r.node_id = static_cast<std::uint32_t>(g() % 100000);
    r.interface_id = sim::interface_id(r.node_id);
    r.signal_name = "UDPData-" + std::to_string(g() % 100000);
    r.sequence_no = g() >> (g() % 64);
    r.start_time = random_double(g);
    r.start_pos = {random_double(g), random_double(g)};
    r.end_time = r.start_time + std::abs(random_double(g));
    r.end_pos = {random_double(g), random_double(g)};
    if (r.side == Side::RX) r.rssi = random_double(g);
    REQUIRE(parse_record(write_record(r)) == r);
  }
}

TEST_CASE("log round trip") {
  const PacketLog log{tx_record(), rx_record(2, -60.0), rx_record(3, -80.125)};
  std::stringstream ss;
  write_log(ss, log);
  CHECK(read_log(ss) == log);
}

TEST_CASE("reconciliation") {
  SUBCASE("one TX broadcast to three receivers") {
    const PacketLog log{tx_record(), rx_record(2, -60), rx_record(3, -61), rx_record(4, -62)};
    ReconcileStats st;
    const auto linked = reconcile(log, &st);
    CHECK(linked.size() == 3);
    for (const auto& lp : linked) CHECK(lp.tx == log[0]);
    CHECK(st.linked == 3);
  }
  SUBCASE("RX with an unknown key") {
    PacketRecord rx = rx_record(2, -60);
    rx.sequence_no = 1;
    CHECK_THROWS_AS(reconcile(PacketLog{tx_record(), rx}), ReconcileError);
  }
  SUBCASE("duplicate TX key") {
    CHECK_THROWS_AS(reconcile(PacketLog{tx_record(), tx_record()}), ReconcileError);
  }
  SUBCASE("lost packets are fine") {
    ReconcileStats st;
    PacketRecord other = tx_record();
    other.sequence_no = 1028;
    CHECK(reconcile(PacketLog{tx_record(), other, rx_record(2, -60)}, &st).size() == 1);
    CHECK(st.unmatched_tx == 1);
  }
  SUBCASE("linked count equals delivered outcomes of a seeded run") {
    sim::ScenarioConfig c;
    c.area_width_m = 600;
    c.area_height_m = 600;
    c.fleet_size = 20;
    c.sim_duration_s = 20;
    sim::SimStats stats;
    const auto log = sim::run_simulation(c, sim::ChannelParams{}, &stats);
    CHECK(reconcile(log).size() == stats.delivered);
  }
}

TEST_CASE("feature extraction") {
  const PacketRecord tx = tx_record();
  const PacketRecord rx = rx_record(7, -66.5);
  const FeatureVector f = extract_features(tx, rx);
  const auto flat = f.flatten();
  REQUIRE(flat.size() == 5);
  CHECK(flat[0] == rx.end_pos.x);
  CHECK(flat[1] == rx.end_pos.y);
  CHECK(flat[2] == -66.5);
  CHECK(flat[3] == tx.start_pos.x);
  CHECK(flat[4] == tx.start_pos.y);
  CHECK(f.d_true == doctest::Approx(distance(rx.end_pos, tx.start_pos)));
  CHECK(f.label == Label::Normal);
}

TEST_CASE("min-max scaler") {
  std::vector<FeatureVector> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].rx = {5.0 * i, 100.0 + i};
    rows[i].rssi = -90.0 + 10 * i;
    rows[i].tx_reported = {2.0 * i, 7.0 - i};
  }
  const Scaler s = fit_scaler(rows);
  CHECK(apply_scaler(s, rows[0])[0] == 0.0);
  CHECK(apply_scaler(s, rows[1])[0] == 0.5);
  CHECK(apply_scaler(s, rows[2])[0] == 1.0);
  for (const auto& r : rows)
    for (double v : apply_scaler(s, r)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  FeatureVector out = rows[2];
  out.rx.x = 20.0;
  CHECK(apply_scaler(s, out)[0] == doctest::Approx(2.0));

  std::vector<FeatureVector> flat(3, rows[0]);
  CHECK_THROWS_AS(fit_scaler(flat), std::invalid_argument);
}

TEST_CASE("seeded split") {
  std::vector<FeatureVector> rows(1000);
  for (int i = 0; i < 1000; ++i) rows[i].rssi = i;
  const Split a = split(rows, 0.8, 17);
  CHECK(a.train.size() == 800);
  CHECK(a.validation.size() == 200);
  std::multiset<double> all;
  for (const auto& r : a.train) all.insert(r.rssi);
  for (const auto& r : a.validation) all.insert(r.rssi);
  CHECK(all.size() == 1000);
  CHECK(std::set<double>(all.begin(), all.end()).size() == 1000);
  const Split b = split(rows, 0.8, 17);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  const Split c = split(rows, 0.8, 18);
  CHECK_FALSE(a.train == c.train);
}

TEST_CASE("feature csv round trip") {
  std::vector<FeatureVector> rows(2);
  rows[0].rx = {1.5, 2.25};
  rows[0].rssi = -70.1;
  rows[0].tx_reported = {10, 20};
  rows[0].d_true = 3.0;
  rows[1] = rows[0];
  rows[1].label = Label::Anomalous;
  rows[1].tx_true = {11, 21};
  std::stringstream plain;
  write_features_csv(plain, {rows[0]}, false);
  CHECK(plain.str().rfind("x_r,y_r,rssi,x_t,y_t,label,d_true\n", 0) == 0);
  std::stringstream truth;
  write_features_csv(truth, rows, true);
  const auto back = read_features_csv(truth);
  REQUIRE(back.size() == 2);
  CHECK(back[1].label == Label::Anomalous);
  CHECK(back[1].tx_true == rows[1].tx_true);
  CHECK(back[0].flatten() == rows[0].flatten());
}
