#include "ghostdet/config.hpp"

#include <charconv>
#include <cstdio>
#include <limits>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "ghostdet/rng.hpp"
#include "ghostdet/trace_io.hpp"

namespace ghostdet::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return d;
}

template <class T>
T as_unsigned(const std::string& key, const std::string& v) {
  T d = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
  return d;
}

int as_int(const std::string& key, const std::string& v) {
  int d = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return d;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::string num(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : trace::format_double(v); }

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Get>
Field real(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = as_double(k, v); },
          [get](const RunConfig& c) { return num(get(c)); }};
}

template <class T, class Get>
Field uint(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = as_unsigned<T>(k, v); },
          [get](const RunConfig& c) { return std::to_string(get(c)); }};
}

template <class Get>
Field integer(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = as_int(k, v); },
          [get](const RunConfig& c) { return std::to_string(get(c)); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("run.seed", uint<std::uint64_t>([](auto& c) -> auto& { return c.master_seed; }));
    t.emplace_back("run.output_dir",
                   Field{[](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; },
                         [](const RunConfig& c) { return c.output_dir.string(); }});
    t.emplace_back("run.threads", uint<unsigned>([](auto& c) -> auto& { return c.threads; }));

    t.emplace_back("scenario.area_width", real([](auto& c) -> auto& { return c.scenario.area_width_m; }));
    t.emplace_back("scenario.area_height", real([](auto& c) -> auto& { return c.scenario.area_height_m; }));
    t.emplace_back("scenario.duration", real([](auto& c) -> auto& { return c.scenario.sim_duration_s; }));
    t.emplace_back("scenario.fleet_size", uint<std::uint32_t>([](auto& c) -> auto& { return c.scenario.fleet_size; }));
    t.emplace_back("scenario.beacon_interval", real([](auto& c) -> auto& { return c.scenario.beacon_interval_s; }));
    t.emplace_back("scenario.packet_length",
                   uint<std::uint32_t>([](auto& c) -> auto& { return c.scenario.packet_length_bytes; }));
    t.emplace_back("scenario.grid_spacing", real([](auto& c) -> auto& { return c.scenario.grid_spacing_m; }));
    t.emplace_back("scenario.street_width", real([](auto& c) -> auto& { return c.scenario.street_width_m; }));
    t.emplace_back("scenario.building_setback", real([](auto& c) -> auto& { return c.scenario.building_setback_m; }));
    t.emplace_back("scenario.park_fraction", real([](auto& c) -> auto& { return c.scenario.park_fraction; }));
    t.emplace_back("scenario.wall_loss", real([](auto& c) -> auto& { return c.scenario.wall_loss_db; }));
    t.emplace_back("scenario.interior_loss", real([](auto& c) -> auto& { return c.scenario.interior_loss_db_per_m; }));
    t.emplace_back("scenario.auto_obstacles",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.scenario.auto_obstacles = as_bool(k, v);
                         },
                         [](const RunConfig& c) { return std::string(c.scenario.auto_obstacles ? "true" : "false"); }});
    t.emplace_back("scenario.speed_min", real([](auto& c) -> auto& { return c.scenario.speed_min_mps; }));
    t.emplace_back("scenario.speed_max", real([](auto& c) -> auto& { return c.scenario.speed_max_mps; }));
    t.emplace_back("scenario.min_vehicle_gap", real([](auto& c) -> auto& { return c.scenario.min_vehicle_gap_m; }));
    t.emplace_back("scenario.trace_file",
                   Field{[](RunConfig& c, const std::string&, const std::string& v) {
                           if (v.empty()) c.trace_file.reset(); else c.trace_file = v;
                         },
                         [](const RunConfig& c) { return c.trace_file ? c.trace_file->string() : std::string(); }});

    t.emplace_back("channel.carrier_freq", real([](auto& c) -> auto& { return c.channel.carrier_freq_hz; }));
    t.emplace_back("channel.tx_power", real([](auto& c) -> auto& { return c.channel.tx_power_dbm; }));
    t.emplace_back("channel.antenna_gain_tx", real([](auto& c) -> auto& { return c.channel.antenna_gain_tx_dbi; }));
    t.emplace_back("channel.antenna_gain_rx", real([](auto& c) -> auto& { return c.channel.antenna_gain_rx_dbi; }));
    t.emplace_back("channel.cable_loss", real([](auto& c) -> auto& { return c.channel.cable_loss_db; }));
    t.emplace_back("channel.path_loss_exponent", real([](auto& c) -> auto& { return c.channel.path_loss_exponent; }));
    t.emplace_back("channel.rician_k", real([](auto& c) -> auto& { return c.channel.rician_k_db; }));
    t.emplace_back("channel.reference_distance", real([](auto& c) -> auto& { return c.channel.reference_distance_m; }));
    t.emplace_back("channel.noise_mean", real([](auto& c) -> auto& { return c.channel.noise_mean_dbm; }));
    t.emplace_back("channel.noise_std", real([](auto& c) -> auto& { return c.channel.noise_std_db; }));
    t.emplace_back("channel.sensitivity", real([](auto& c) -> auto& { return c.channel.sensitivity_dbm; }));
    t.emplace_back("channel.snir_threshold", real([](auto& c) -> auto& { return c.channel.snir_threshold_db; }));
    t.emplace_back("channel.bandwidth", real([](auto& c) -> auto& { return c.channel.bandwidth_hz; }));
    t.emplace_back("channel.bitrate", real([](auto& c) -> auto& { return c.channel.bitrate_bps; }));
    t.emplace_back("channel.preamble", real([](auto& c) -> auto& { return c.channel.preamble_s; }));

    t.emplace_back("inject.train_pool", uint<std::uint32_t>([](auto& c) -> auto& { return c.inject.train_pool; }));
    t.emplace_back("inject.holdout", uint<std::uint32_t>([](auto& c) -> auto& { return c.inject.holdout; }));

    t.emplace_back("dae.widths",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           std::vector<int> w;
                           for (const auto& s : words(v)) w.push_back(as_int(k, s));
                           c.dae.arch = dae::Architecture::with_widths(std::move(w));
                         },
                         [](const RunConfig& c) {
                           std::string s;
                           for (int w : c.dae.arch.widths) s += (s.empty() ? "" : " ") + std::to_string(w);
                           return s;
                         }});
    t.emplace_back("dae.epochs", integer([](auto& c) -> auto& { return c.dae.epochs; }));
    t.emplace_back("dae.learning_rate", real([](auto& c) -> auto& { return c.dae.learning_rate; }));
    t.emplace_back("dae.batch_size", integer([](auto& c) -> auto& { return c.dae.batch_size; }));
    t.emplace_back("dae.lr_decay", real([](auto& c) -> auto& { return c.dae.lr_decay; }));
    t.emplace_back("dae.split_ratio", real([](auto& c) -> auto& { return c.dae.split_ratio; }));

    t.emplace_back("ocsvm.nu", real([](auto& c) -> auto& { return c.ocsvm.nu; }));
    t.emplace_back("ocsvm.epochs", integer([](auto& c) -> auto& { return c.ocsvm.epochs; }));
    t.emplace_back("ocsvm.learning_rate", real([](auto& c) -> auto& { return c.ocsvm.learning_rate; }));

    t.emplace_back("eval.target_fpr", real([](auto& c) -> auto& { return c.target_fpr; }));
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return &f;
  return nullptr;
}

sim::Obstacle parse_obstacle(const std::string& key, const std::string& value, const sim::ScenarioConfig& sc) {
  const auto w = words(value);
  if (w.size() != 4 && w.size() != 6)
    throw ConfigError(key, "expected 'x0 y0 x1 y1 [wall_loss interior_loss]'");
  sim::Obstacle ob;
  ob.bounds = {as_double(key, w[0]), as_double(key, w[1]), as_double(key, w[2]), as_double(key, w[3])};
  ob.wall_loss_db = w.size() == 6 ? as_double(key, w[4]) : sc.wall_loss_db;
  ob.interior_loss_db_per_m = w.size() == 6 ? as_double(key, w[5]) : sc.interior_loss_db_per_m;
  return ob;
}

inject::BandSpec parse_band(const std::string& key, const std::string& name, const std::string& value) {
  inject::BandSpec b;
  b.name = name;
  bool have_range = false;
  try {
    for (const auto& w : words(value)) {
      const auto eq = w.find('=');
      if (eq == std::string::npos) throw ConfigError(key, "expected d_tt=..., gap=... or n=..., got '" + w + "'");
      const std::string k = w.substr(0, eq);
      const std::string v = w.substr(eq + 1);
      if (k == "d_tt") {
        b.d_tt = inject::parse_interval(v);
        have_range = true;
      } else if (k == "gap") {
        b.annulus = inject::parse_interval(v);
      } else if (k == "n") {
        b.sample_count = as_unsigned<std::uint32_t>(key, v);
      } else {
        throw ConfigError(key, "unknown band attribute '" + k + "'");
      }
    }
    if (!have_range) throw ConfigError(key, "missing d_tt range");
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
  return b;
}

}  // namespace

std::uint64_t RunConfig::seed_for(const char* label) const { return derive_seed(master_seed, label); }

sim::ScenarioConfig RunConfig::scenario_with_seed() const {
  sim::ScenarioConfig s = scenario;
  s.seed = seed_for("scenario");
  return s;
}

void RunConfig::validate() const {
  const auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      // Module validators prefix their messages with "section.field:".
      const auto colon = msg.find(':');
      const std::string key = colon != std::string::npos && msg.find('.') < colon ? msg.substr(0, colon) : section;
      throw ConfigError(key, msg);
    }
  };
  wrap("scenario", [&] { scenario.validate(); });
  wrap("channel", [&] { channel.validate(); });
  wrap("dae.widths", [&] { dae.arch.validate(); });
  for (const auto& b : bands) wrap("bands", [&] { b.validate(); });
  if (dae.epochs < 0) throw ConfigError("dae.epochs", "must be >= 0");
  if (dae.batch_size <= 0) throw ConfigError("dae.batch_size", "must be > 0");
  if (!(dae.learning_rate > 0)) throw ConfigError("dae.learning_rate", "must be > 0");
  if (!(dae.lr_decay > 0)) throw ConfigError("dae.lr_decay", "must be > 0");
  if (!(dae.split_ratio > 0 && dae.split_ratio < 1)) throw ConfigError("dae.split_ratio", "must be in (0, 1)");
  if (!(ocsvm.nu > 0 && ocsvm.nu <= 1)) throw ConfigError("ocsvm.nu", "must be in (0, 1]");
  if (ocsvm.epochs < 0) throw ConfigError("ocsvm.epochs", "must be >= 0");
  if (!(ocsvm.learning_rate > 0)) throw ConfigError("ocsvm.learning_rate", "must be > 0");
  if (!(target_fpr >= 0 && target_fpr <= 1)) throw ConfigError("eval.target_fpr", "must be in [0, 1]");
  if (inject.train_pool < 10) throw ConfigError("inject.train_pool", "must be >= 10");
  if (inject.holdout == 0) throw ConfigError("inject.holdout", "must be > 0");
}

RunConfig parse(const std::string& text) {
  RunConfig c;
  std::string section;
  bool bands_seen = false;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "bands" && !bands_seen) {
        bands_seen = true;
        c.bands.clear();
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(section + "." + line, "expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string key = section.empty() ? name : section + "." + name;
    if (section == "obstacles") {
      if (name != "rect") throw ConfigError(key, "unknown key (only 'rect' is allowed)");
      c.scenario.obstacles.push_back(parse_obstacle(key, value, c.scenario));
    } else if (section == "bands") {
      for (const auto& b : c.bands)
        if (b.name == name) throw ConfigError(key, "duplicate band");
      c.bands.push_back(parse_band(key, name, value));
    } else if (const Field* f = find_field(key)) {
      f->set(c, key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  c.validate();
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

std::string render(const RunConfig& c, bool results_only) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, f] : fields()) {
    if (results_only && (key == "run.output_dir" || key == "run.threads")) continue;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << f.get(c) << '\n';
  }
  if (!c.scenario.obstacles.empty()) {
    out << "\n[obstacles]\n";
    for (const auto& ob : c.scenario.obstacles)
      out << "rect = " << num(ob.bounds.x0) << ' ' << num(ob.bounds.y0) << ' ' << num(ob.bounds.x1) << ' '
          << num(ob.bounds.y1) << ' ' << num(ob.wall_loss_db) << ' ' << num(ob.interior_loss_db_per_m) << '\n';
  }
  out << "\n[bands]\n";
  for (const auto& b : c.bands) {
    out << b.name << " = d_tt=" << inject::to_string(b.d_tt);
    if (b.annulus) out << " gap=" << inject::to_string(*b.annulus);
    out << " n=" << b.sample_count << '\n';
  }
  return out.str();
}

}  // namespace

std::string to_text(const RunConfig& c) { return render(c, false); }

std::string config_hash(const RunConfig& c) {
  // Output location and thread count do not influence results.
  char buf[17];
  const std::uint64_t h = fnv1a64(render(c, true));
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ghostdet::config
