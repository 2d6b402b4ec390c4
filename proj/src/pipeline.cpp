#include "ghostdet/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ghostdet/anomaly.hpp"
#include "ghostdet/checkpoint.hpp"
#include "ghostdet/rng.hpp"
#include "ghostdet/trace_io.hpp"

namespace ghostdet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw std::runtime_error("missing artifact: " + p.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  require_file(p);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

void write_manifest(const config::RunConfig& cfg, const std::string& command, const std::vector<fs::path>& outputs,
                    json counts) {
  const Layout layout{cfg.output_dir};
  json m;
  m["command"] = command;
  m["config_hash"] = config::config_hash(cfg);
  m["seed"] = cfg.master_seed;
  m["counts"] = std::move(counts);
  json files = json::array();
  for (const auto& p : outputs)
    files.push_back({{"path", fs::relative(p, layout.root).generic_string()}, {"fnv1a64", file_hash(p)},
                     {"config_hash", m["config_hash"]}, {"seed", cfg.master_seed}});
  m["outputs"] = std::move(files);
  auto out = open_out(layout.manifest(command));
  out << m.dump(2) << '\n';
}

std::vector<trace::FeatureVector> read_features(const fs::path& p) {
  auto in = open_in(p);
  return trace::read_features_csv(in);
}

void write_features(const fs::path& p, const std::vector<trace::FeatureVector>& rows, bool with_truth) {
  auto out = open_out(p);
  trace::write_features_csv(out, rows, with_truth);
}

dae::Batch scaled_batch(const trace::Scaler& s, const std::vector<trace::FeatureVector>& rows) {
  dae::Batch b(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto x = trace::apply_scaler(s, rows[i]);
    for (int j = 0; j < 5; ++j) b(static_cast<Eigen::Index>(i), j) = x[j];
  }
  return b;
}

std::vector<ocsvm::Sample> scaled_samples(const trace::Scaler& s, const std::vector<trace::FeatureVector>& rows) {
  std::vector<ocsvm::Sample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(trace::apply_scaler(s, r));
  return out;
}

std::vector<double> ocsvm_scores(const ocsvm::OcsvmModel& m, const std::vector<ocsvm::Sample>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(ocsvm::score_ocsvm(m, x));
  return out;
}

void write_values_csv(const fs::path& p, const std::string& header, const std::vector<double>& values) {
  auto out = open_out(p);
  out << "index," << header << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << trace::format_double(values[i]) << '\n';
}

}  // namespace

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

const EvalRow& EvalOutcome::at(const std::string& detector, const std::string& dataset) const {
  for (const auto& r : rows)
    if (r.detector == detector && r.dataset == dataset) return r;
  throw std::out_of_range("no evaluation row for " + detector + "/" + dataset);
}

SimulateOutcome cmd_simulate(const config::RunConfig& cfg) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  sim::SimOptions options;
  options.threads = cfg.threads;
  if (cfg.trace_file) {
    auto in = open_in(*cfg.trace_file);
    options.traces = sim::read_traces_csv(in);
  }
  SimulateOutcome result;
  result.log = layout.log();
  {
    auto out = open_out(result.log);
    std::vector<char> buffer(1 << 20);
    out.rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    std::string line;
    result.stats = sim::run_simulation(
        cfg.scenario_with_seed(), cfg.channel,
        [&out](const trace::PacketRecord& r) { out << trace::write_record(r) << '\n'; }, options);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + result.log.string());
  }
  const auto& s = result.stats;
  write_manifest(cfg, "simulate", {result.log},
                 {{"tx_records", s.tx_records},
                  {"rx_records", s.delivered},
                  {"evaluations", s.evaluations},
                  {"delivered", s.delivered},
                  {"below_sensitivity", s.below_sensitivity},
                  {"below_snir", s.below_snir},
                  {"per_drop", s.per_drop},
                  {"clamped_distance", s.clamped_distance},
                  {"invariant_violations", s.invariant_violations}});
  return result;
}

InjectOutcome cmd_inject(const config::RunConfig& cfg) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  InjectOutcome result;

  std::vector<trace::FeatureVector> normal;
  {
    auto in = open_in(layout.log());
    trace::Reconciler rec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line.front() == '#') continue;
      trace::PacketRecord r;
      try {
        r = trace::parse_record(line);
      } catch (const trace::ParseError& e) {
        throw trace::ParseError(e.field(), e.column(), layout.log().string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      if (r.side == trace::Side::TX) {
        rec.add_tx(r);
      } else {
        normal.push_back(trace::extract_features(rec.match(r), r));
      }
    }
    result.tx_records = rec.tx_count();
    result.linked = normal.size();
  }

  const std::size_t largest_band =
      std::max_element(cfg.bands.begin(), cfg.bands.end(), [](const auto& a, const auto& b) {
        return a.sample_count < b.sample_count;
      })->sample_count;
  const std::size_t needed = std::size_t{cfg.inject.train_pool} + cfg.inject.holdout + largest_band;
  if (normal.size() < needed)
    throw std::runtime_error("inject: " + std::to_string(normal.size()) + " delivered packets, need at least " +
                             std::to_string(needed) + " (train pool + hold-out + largest band)");

  std::mt19937_64 rng(cfg.seed_for("inject.partition"));
  std::shuffle(normal.begin(), normal.end(), rng);
  const auto train_end = normal.begin() + cfg.inject.train_pool;
  const auto holdout_end = train_end + cfg.inject.holdout;
  const std::vector<trace::FeatureVector> train(normal.begin(), train_end);
  const std::vector<trace::FeatureVector> holdout(train_end, holdout_end);
  const std::vector<trace::FeatureVector> sources(holdout_end, normal.end());
  normal.clear();
  normal.shrink_to_fit();
  result.train_pool = train.size();
  result.holdout = holdout.size();

  std::vector<fs::path> outputs{layout.normal(), layout.holdout()};
  write_features(layout.normal(), train, false);
  write_features(layout.holdout(), holdout, false);

  const sim::Scenario scenario = sim::build_scenario(cfg.scenario_with_seed());
  const inject::AccessibleRegion region(scenario);
  json infeasible = json::object();
  for (const auto& band : cfg.bands) {
    const auto ds = inject::build_anomaly_dataset(sources, band, region, derive_seed(cfg.seed_for("inject.bands"), band.name));
    for (const auto& s : ds.samples)
      if (!inject::satisfies(s, band, region))
        throw std::logic_error("inject: generated sample violates band " + band.name);
    write_features(layout.band(band.name), ds.samples, true);
    outputs.push_back(layout.band(band.name));
    result.bands.push_back(band.name);
    infeasible[band.name] = ds.infeasible_sources;
  }
  write_manifest(cfg, "inject", outputs,
                 {{"tx_records", result.tx_records},
                  {"linked", result.linked},
                  {"train_pool", result.train_pool},
                  {"holdout", result.holdout},
                  {"infeasible_sources", infeasible}});
  return result;
}

TrainOutcome cmd_train(const config::RunConfig& cfg) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  const auto normal = read_features(layout.normal());
  const trace::Split parts = trace::split(normal, cfg.dae.split_ratio, cfg.seed_for("split"));
  const trace::Scaler scaler = trace::fit_scaler(parts.train);
  const dae::Batch train_x = scaled_batch(scaler, parts.train);
  const dae::Batch val_x = scaled_batch(scaler, parts.validation);

  TrainOutcome result;
  dae::DaeModel model = dae::init_model(cfg.dae.arch, cfg.seed_for("dae.init"));
  dae::TrainConfig tc;
  tc.epochs = cfg.dae.epochs;
  tc.learning_rate = cfg.dae.learning_rate;
  tc.batch_size = cfg.dae.batch_size;
  tc.lr_decay = cfg.dae.lr_decay;
  tc.seed = cfg.seed_for("dae.train");
  result.dae_report = dae::train(model, train_x, val_x, tc);
  result.comparison = eval::compare_loss_distributions(result.dae_report.train_losses, result.dae_report.val_losses,
                                                       cfg.seed_for("loss_comparison"));

  const auto train_samples = scaled_samples(scaler, parts.train);
  ocsvm::OcsvmConfig oc;
  oc.nu = cfg.ocsvm.nu;
  oc.epochs = cfg.ocsvm.epochs;
  oc.learning_rate = cfg.ocsvm.learning_rate;
  oc.seed = cfg.seed_for("ocsvm");
  result.ocsvm = ocsvm::train_ocsvm(train_samples, oc);
  result.ocsvm_outlier_fraction = ocsvm::outlier_fraction(result.ocsvm, train_samples);

  fs::create_directories(layout.models());
  auto dae_c = ckpt::to_container(model);
  ckpt::put_scaler(dae_c, scaler);
  ckpt::save(layout.dae_checkpoint(), dae_c);
  auto oc_c = ckpt::to_container(result.ocsvm);
  ckpt::put_scaler(oc_c, scaler);
  ckpt::save(layout.ocsvm_checkpoint(), oc_c);

  const fs::path epochs_csv = layout.train_dir() / "epoch_losses.csv";
  {
    auto out = open_out(epochs_csv);
    out << "epoch,mean_train_loss\n";
    for (std::size_t e = 0; e < result.dae_report.epoch_losses.size(); ++e)
      out << e << ',' << trace::format_double(result.dae_report.epoch_losses[e]) << '\n';
  }
  const fs::path train_csv = layout.train_dir() / "train_losses.csv";
  const fs::path val_csv = layout.train_dir() / "validation_losses.csv";
  write_values_csv(train_csv, "loss", result.dae_report.train_losses);
  write_values_csv(val_csv, "loss", result.dae_report.val_losses);
  const fs::path cmp_csv = layout.train_dir() / "loss_comparison.csv";
  {
    auto out = open_out(cmp_csv);
    eval::write_loss_comparison_csv(out, result.comparison);
  }
  write_manifest(cfg, "train",
                 {layout.dae_checkpoint(), layout.ocsvm_checkpoint(), epochs_csv, train_csv, val_csv, cmp_csv},
                 {{"train_samples", parts.train.size()},
                  {"validation_samples", parts.validation.size()},
                  {"initial_loss", result.dae_report.initial_loss},
                  {"final_epoch_loss",
                   result.dae_report.epoch_losses.empty() ? result.dae_report.initial_loss
                                                          : result.dae_report.epoch_losses.back()},
                  {"ocsvm_outlier_fraction", result.ocsvm_outlier_fraction}});
  return result;
}

EvalOutcome cmd_eval(const config::RunConfig& cfg) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  require_file(layout.dae_checkpoint());
  require_file(layout.ocsvm_checkpoint());
  const auto dae_c = ckpt::load(layout.dae_checkpoint());
  const auto model = ckpt::dae_from(dae_c);
  const auto scaler = ckpt::scaler_from(dae_c);
  const auto svm = ckpt::ocsvm_from(ckpt::load(layout.ocsvm_checkpoint()));

  const auto holdout = read_features(layout.holdout());
  const auto dae_normal = dae::score(model, scaled_batch(scaler, holdout));
  const auto svm_normal = ocsvm_scores(svm, scaled_samples(scaler, holdout));

  EvalOutcome result;
  result.dae_holdout_mean_score = eval::mean(dae_normal);
  std::vector<fs::path> outputs;
  std::ostringstream fpr_label;
  fpr_label << cfg.target_fpr;
  for (const auto& band : cfg.bands) {
    const auto rows = read_features(layout.band(band.name));
    const auto dae_anom = dae::score(model, scaled_batch(scaler, rows));
    const auto svm_anom = ocsvm_scores(svm, scaled_samples(scaler, rows));
    for (const auto& [detector, normal_scores, anom_scores] :
         {std::tuple{std::string("DAE"), &dae_normal, &dae_anom}, std::tuple{std::string("OCSVM"), &svm_normal, &svm_anom}}) {
      eval::RocReport roc = eval::roc_curve(*normal_scores, *anom_scores);
      roc.detector = detector;
      roc.dataset = band.name;
      const fs::path p = layout.roc(detector, band.name);
      {
        auto out = open_out(p);
        eval::write_roc_csv(out, roc);
      }
      outputs.push_back(p);
      result.rows.push_back({detector, band.name, roc.auc, eval::tpr_at_fpr(roc, cfg.target_fpr), eval::mean(*anom_scores)});
    }
  }
  {
    auto out = open_out(layout.summary());
    out << "detector,dataset,auc,tpr_at_fpr_" << fpr_label.str() << '\n';
    for (const auto& r : result.rows)
      out << r.detector << ',' << r.dataset << ',' << trace::format_double(r.auc) << ','
          << trace::format_double(r.tpr_at_target) << '\n';
  }
  outputs.push_back(layout.summary());
  const fs::path rate_csv = layout.eval_dir() / "detection_rate.csv";
  {
    auto out = open_out(rate_csv);
    out << "dataset,d_tt,gap,dae_tpr_at_fpr_" << fpr_label.str() << ",ocsvm_tpr_at_fpr_" << fpr_label.str() << '\n';
    for (const auto& band : cfg.bands)
      out << band.name << ',' << inject::to_string(band.d_tt) << ','
          << (band.annulus ? inject::to_string(*band.annulus) : std::string()) << ','
          << trace::format_double(result.at("DAE", band.name).tpr_at_target) << ','
          << trace::format_double(result.at("OCSVM", band.name).tpr_at_target) << '\n';
  }
  outputs.push_back(rate_csv);
  write_manifest(cfg, "eval", outputs, {{"roc_files", 2 * cfg.bands.size()}, {"summary_rows", result.rows.size()}});
  return result;
}

std::string cmd_report(const config::RunConfig& cfg) {
  const Layout layout{cfg.output_dir};
  std::ostringstream out;
  const auto copy = [&out](const fs::path& p, const char* title) {
    auto in = open_in(p);
    out << "== " << title << " (" << p.filename().string() << ")\n" << in.rdbuf() << '\n';
  };
  out << "config hash " << config::config_hash(cfg) << ", seed " << cfg.master_seed << "\n\n";
  copy(layout.train_dir() / "loss_comparison.csv", "train/validation loss comparison");
  copy(layout.summary(), "ROC summary");
  copy(layout.eval_dir() / "detection_rate.csv", "detection rate at target FPR");
  const std::string text = out.str();
  auto file = open_out(layout.root / "report.txt");
  file << text;
  return text;
}

PipelineOutcome run_all(const config::RunConfig& cfg) {
  PipelineOutcome r;
  r.simulate = cmd_simulate(cfg);
  r.inject = cmd_inject(cfg);
  r.train = cmd_train(cfg);
  r.eval = cmd_eval(cfg);
  cmd_report(cfg);
  return r;
}

}  // namespace ghostdet::pipeline
