#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostdet/anomaly.hpp"
#include "ghostdet/channel.hpp"
#include "ghostdet/dae.hpp"
#include "ghostdet/ocsvm.hpp"
#include "ghostdet/scenario.hpp"

namespace ghostdet::config {

/// Validation failure attributable to one config key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& detail)
      : std::runtime_error("config key '" + key + "': " + detail), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct InjectSettings {
  std::uint32_t train_pool = 20000;  ///< normal samples handed to training
  std::uint32_t holdout = 1000;      ///< normal samples held out for evaluation
};

struct DaeSettings {
  dae::Architecture arch;
  int epochs = 200;
  double learning_rate = 0.00095;
  int batch_size = 64;
  double lr_decay = 1.0;
  double split_ratio = 0.8;
};

struct OcsvmSettings {
  double nu = 0.1;
  int epochs = 500;
  double learning_rate = 0.01;
};

/// Everything one pipeline run needs. Module seeds are derived from
/// `master_seed` by label, so e.g. the DAE settings never perturb the
/// simulation's random streams.
struct RunConfig {
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;
  sim::ScenarioConfig scenario;
  std::optional<std::filesystem::path> trace_file;
  sim::ChannelParams channel;
  std::vector<inject::BandSpec> bands = inject::default_bands();
  InjectSettings inject;
  DaeSettings dae;
  OcsvmSettings ocsvm;
  double target_fpr = 0.2;

  std::uint64_t seed_for(const char* label) const;
  /// Scenario config with its seed derived from the master seed.
  sim::ScenarioConfig scenario_with_seed() const;
  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Parses the INI-style text format. Unknown sections or keys and malformed
/// values raise ConfigError naming `section.key`.
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Canonical text form; parse(to_text(c)) reproduces c.
std::string to_text(const RunConfig& c);

/// FNV-1a of the canonical text, hex encoded.
std::string config_hash(const RunConfig& c);

}  // namespace ghostdet::config
