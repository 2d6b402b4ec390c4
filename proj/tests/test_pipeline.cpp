#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ghostdet/config.hpp"
#include "ghostdet/pipeline.hpp"

using namespace ghostdet;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig =
    "[scenario]\narea_width = 800\narea_height = 800\nfleet_size = 30\nduration = 120\n"
    "[inject]\ntrain_pool = 2000\nholdout = 300\n"
    "[dae]\nepochs = 3\n"
    "[ocsvm]\nepochs = 50\n"
    "[bands]\n"
    "AD1 = d_tt=[0,10) n=300\nAD2 = d_tt=[10,20) n=300\nAD3 = d_tt=[20,30) n=300\nAD4 = d_tt=[30,40) n=300\n"
    "AD5 = d_tt=[40,50) n=300\nAD6 = d_tt=[50,100) n=300\nAD7 = d_tt=[100,500) n=300\nAD8 = d_tt=[500,inf) n=300\n"
    "AD9 = d_tt=(30,inf) gap=[0,1) n=300\nAD10 = d_tt=(30,inf) gap=[10,20] n=300\n";

config::RunConfig tiny(const fs::path& out) {
  config::RunConfig c = config::parse(kTinyConfig);
  c.output_dir = out;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GHOSTDET_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ghostdet_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("full pipeline on a small scenario") {
  const fs::path out = scratch("a");
  const config::RunConfig cfg = tiny(out);
  const auto r = pipeline::run_all(cfg);
  const pipeline::Layout layout{out};

  CHECK(r.simulate.stats.tx_records == 30u * 120u);
  const auto manifest = nlohmann::json::parse(slurp(layout.manifest("simulate")));
  CHECK(manifest["counts"]["tx_records"] == 3600);
  CHECK(manifest["config_hash"] == config::config_hash(cfg));
  CHECK(manifest["seed"] == cfg.master_seed);

  CHECK(r.inject.bands.size() == 10);
  for (const auto& b : cfg.bands) CHECK(fs::exists(layout.band(b.name)));
  CHECK(fs::exists(layout.holdout()));
  CHECK(fs::exists(layout.normal()));

  for (const char* cmd : {"simulate", "inject", "train", "eval"}) {
    const auto m = nlohmann::json::parse(slurp(layout.manifest(cmd)));
    for (const auto& f : m["outputs"]) {
      CHECK(f["config_hash"] == config::config_hash(cfg));
      CHECK(f["seed"] == cfg.master_seed);
      CHECK(f["fnv1a64"] == pipeline::file_hash(out / f["path"].get<std::string>()));
    }
  }

  CHECK(r.eval.rows.size() == 20);
  int roc_files = 0;
  for (const auto& e : fs::directory_iterator(layout.eval_dir() / "roc")) roc_files += e.path().extension() == ".csv";
  CHECK(roc_files == 20);
  const std::string summary = slurp(layout.summary());
  CHECK(summary.rfind("detector,dataset,auc,tpr_at_fpr_0.2\n", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 21);

  const std::string cmp = slurp(layout.train_dir() / "loss_comparison.csv");
  CHECK(cmp.find("ami") != std::string::npos);
  CHECK(cmp.find("mean") != std::string::npos);
  CHECK(cmp.find("variance") != std::string::npos);
  CHECK(fs::exists(out / "report.txt"));

  SUBCASE("rerun with the same config reproduces every artifact") {
    const fs::path again = scratch("b");
    pipeline::run_all(tiny(again));
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), out);
      CAPTURE(rel.string());
      CHECK(pipeline::file_hash(e.path()) == pipeline::file_hash(again / rel));
    }
    fs::remove_all(again);
  }
  SUBCASE("eval without checkpoints reports the missing artifact") {
    fs::remove(layout.dae_checkpoint());
    CHECK_THROWS_WITH(pipeline::cmd_eval(cfg), doctest::Contains("dae.ckpt"));
  }
  fs::remove_all(out);
}

TEST_CASE("inject fails clearly without a log") {
  const fs::path out = scratch("c");
  CHECK_THROWS_WITH(pipeline::cmd_inject(tiny(out)), doctest::Contains("packets.log"));
}

TEST_CASE("CLI exit status") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "tiny.ini") << kTinyConfig;
    std::ofstream(dir / "bad.ini") << "[scenario]\nfleet_sise = 3\n";
  }
  const std::string cfg = " --config " + (dir / "tiny.ini").string() + " --out " + (dir / "out").string();
  CHECK(run_cli("simulate" + cfg) == 0);
  CHECK(run_cli("inject" + cfg) == 0);
  CHECK(run_cli("train" + cfg) == 0);
  CHECK(run_cli("eval" + cfg) == 0);
  CHECK(run_cli("report" + cfg) == 0);
  CHECK(run_cli("simulate --config " + (dir / "bad.ini").string()) == 2);
  CHECK(run_cli("simulate --bogus-flag") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("eval --out " + (dir / "empty").string()) == 1);
  CHECK(run_cli("simulate --seed 5" + cfg) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest_simulate.json"));
  CHECK(m["seed"] == 5);
  fs::remove_all(dir);
}
