// ghostdet: simulate -> inject -> train -> eval -> report.
// Exit status: 0 success, 2 invalid configuration or arguments, 1 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "ghostdet/anomaly.hpp"
#include "ghostdet/config.hpp"
#include "ghostdet/dae.hpp"
#include "ghostdet/pipeline.hpp"
#include "ghostdet/trace_io.hpp"

namespace {

using namespace ghostdet;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
};

config::RunConfig resolve(const Options& o) {
  config::RunConfig cfg = o.config_path.empty() ? config::RunConfig{} : config::load(o.config_path);
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void print_simulate(const pipeline::SimulateOutcome& r) {
  const auto& s = r.stats;
  std::printf("wrote %s\n  tx records   %llu\n  rx records   %llu\n  link events  %llu (below sensitivity %llu, below snir %llu, per drop %llu)\n",
              r.log.string().c_str(), static_cast<unsigned long long>(s.tx_records),
              static_cast<unsigned long long>(s.delivered), static_cast<unsigned long long>(s.evaluations),
              static_cast<unsigned long long>(s.below_sensitivity), static_cast<unsigned long long>(s.below_snir),
              static_cast<unsigned long long>(s.per_drop));
}

void print_inject(const pipeline::InjectOutcome& r) {
  std::printf("linked %zu delivered packets; train pool %zu, hold-out %zu, %zu anomaly sets\n", r.linked, r.train_pool,
              r.holdout, r.bands.size());
}

void print_train(const pipeline::TrainOutcome& r) {
  const auto& c = r.comparison;
  std::printf("DAE: initial loss %.6g, final epoch loss %.6g\n", r.dae_report.initial_loss,
              r.dae_report.epoch_losses.empty() ? r.dae_report.initial_loss : r.dae_report.epoch_losses.back());
  std::printf("loss comparison: AMI %.4f, mean train %.6g, mean val %.6g, var train %.6g, var val %.6g\n", c.ami,
              c.mean_train, c.mean_val, c.var_train, c.var_val);
  std::printf("OC-SVM: rho %.6g, training outlier fraction %.4f\n", r.ocsvm.rho, r.ocsvm_outlier_fraction);
}

void print_eval(const pipeline::EvalOutcome& r) {
  std::printf("%-6s %-5s %8s %10s\n", "det", "set", "auc", "tpr@fpr");
  for (const auto& row : r.rows)
    std::printf("%-6s %-5s %8.4f %10.4f\n", row.detector.c_str(), row.dataset.c_str(), row.auc, row.tpr_at_target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ghost-transmitter detection pipeline for V2V beacon logs"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config_path, "INI configuration file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("-s,--seed", opt.seed, "master seed, overrides run.seed");
    sub->add_option("-o,--out", opt.out, "output directory, overrides run.output_dir");
    sub->add_option("-j,--threads", opt.threads, "worker threads for the simulation (0: all cores)");
  };

  auto* simulate = app.add_subcommand("simulate", "run the V2V beacon simulation and write packets.log");
  auto* inject = app.add_subcommand("inject", "extract features and build the normal and AD1..AD10 sets");
  auto* train = app.add_subcommand("train", "train the autoencoder and the one-class SVM");
  auto* eval = app.add_subcommand("eval", "score every anomaly set and write ROC curves");
  auto* report = app.add_subcommand("report", "print the training and evaluation digest");
  auto* all = app.add_subcommand("all", "run every stage in order");
  auto* show = app.add_subcommand("config", "print the effective configuration");
  for (auto* s : {simulate, inject, train, eval, report, all, show}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  config::RunConfig cfg;
  try {
    cfg = resolve(opt);
  } catch (const config::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*show) {
      std::cout << config::to_text(cfg) << "# hash " << config::config_hash(cfg) << '\n';
    } else if (*simulate) {
      print_simulate(pipeline::cmd_simulate(cfg));
    } else if (*inject) {
      print_inject(pipeline::cmd_inject(cfg));
    } else if (*train) {
      print_train(pipeline::cmd_train(cfg));
    } else if (*eval) {
      print_eval(pipeline::cmd_eval(cfg));
    } else if (*report) {
      std::cout << pipeline::cmd_report(cfg);
    } else if (*all) {
      const auto r = pipeline::run_all(cfg);
      print_simulate(r.simulate);
      print_inject(r.inject);
      print_train(r.train);
      print_eval(r.eval);
    }
  } catch (const inject::InfeasibleBandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const dae::DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 1;
  } catch (const trace::ParseError& e) {
    std::cerr << "parse error in field " << e.field() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
