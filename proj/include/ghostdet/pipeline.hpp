#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ghostdet/config.hpp"
#include "ghostdet/dae.hpp"
#include "ghostdet/eval.hpp"
#include "ghostdet/ocsvm.hpp"
#include "ghostdet/simulation.hpp"

namespace ghostdet::pipeline {

/// Output layout under RunConfig::output_dir.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path log() const { return root / "packets.log"; }
  std::filesystem::path features() const { return root / "features"; }
  std::filesystem::path normal() const { return features() / "normal.csv"; }
  std::filesystem::path holdout() const { return features() / "holdout.csv"; }
  std::filesystem::path band(const std::string& name) const { return features() / (name + ".csv"); }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path dae_checkpoint() const { return models() / "dae.ckpt"; }
  std::filesystem::path ocsvm_checkpoint() const { return models() / "ocsvm.ckpt"; }
  std::filesystem::path train_dir() const { return root / "train"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path roc(const std::string& detector, const std::string& band) const {
    return eval_dir() / "roc" / (detector + "_" + band + ".csv");
  }
  std::filesystem::path summary() const { return eval_dir() / "summary.csv"; }
  std::filesystem::path manifest(const std::string& command) const { return root / ("manifest_" + command + ".json"); }
};

struct SimulateOutcome {
  sim::SimStats stats;
  std::filesystem::path log;
};

struct InjectOutcome {
  std::size_t tx_records = 0;
  std::size_t linked = 0;
  std::size_t train_pool = 0;
  std::size_t holdout = 0;
  std::vector<std::string> bands;
};

struct TrainOutcome {
  dae::TrainReport dae_report;
  eval::LossComparison comparison;
  ocsvm::OcsvmModel ocsvm;
  double ocsvm_outlier_fraction = 0.0;
};

struct EvalRow {
  std::string detector;
  std::string dataset;
  double auc = 0.0;
  double tpr_at_target = 0.0;
  double mean_score = 0.0;
};

struct EvalOutcome {
  std::vector<EvalRow> rows;
  double dae_holdout_mean_score = 0.0;
  const EvalRow& at(const std::string& detector, const std::string& dataset) const;
};

SimulateOutcome cmd_simulate(const config::RunConfig& cfg);
InjectOutcome cmd_inject(const config::RunConfig& cfg);
TrainOutcome cmd_train(const config::RunConfig& cfg);
EvalOutcome cmd_eval(const config::RunConfig& cfg);
/// Human-readable digest of the train and eval outputs; also written to
/// report.txt.
std::string cmd_report(const config::RunConfig& cfg);

struct PipelineOutcome {
  SimulateOutcome simulate;
  InjectOutcome inject;
  TrainOutcome train;
  EvalOutcome eval;
};

PipelineOutcome run_all(const config::RunConfig& cfg);

/// FNV-1a of a file's bytes, hex encoded.
std::string file_hash(const std::filesystem::path& path);

}  // namespace ghostdet::pipeline
