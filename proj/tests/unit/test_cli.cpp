// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemlab/cli/commands.hpp"
#include "chemlab/cli/config.hpp"
#include "test_support.hpp"

using namespace chemlab;
using namespace chemlab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Workspace {
  fs::path root = fs::temp_directory_path() / "chemlab_cli";

  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root);
    SynthOptions s;
    s.count = 300;
    s.max_heavy = 10;
    s.seed = 4;
    s.out = root / "raw.smi";
    cmd_synth(s);
  }
  ~Workspace() { fs::remove_all(root); }

  fs::path config(const std::string& extra = {}) const {
    const auto vocab = (testing::vocab_dir() / "smiles.txt").string();
    std::ofstream out(root / "run.json");
    out << "{\n"
        << "  // comments are allowed\n"
        << "  \"vocab\": {\"source\": \"" << vocab << "\", \"target\": \"" << vocab << "\"},\n"
        << "  \"corpus\": {\"inputs\": [\"raw.smi\"], \"dir\": \"corpus\", \"seed\": 2,\n"
        << "             \"plan\": {\"test_fraction\": 0.1, \"max_heavy_atoms\": 10}},\n"
        << "  \"run_dir\": \"run\",\n"
        << "  \"train\": {\"model\": {\"d_model\": 16, \"d_ff\": 32, \"n_layers\": 1, \"n_heads\": 2},\n"
        << "            \"optimizer\": {\"warmup_steps\": 10, \"max_steps\": 10, \"accumulation\": 1,\n"
        << "                          \"token_budget\": 1024},\n"
        << "            \"eval_interval\": 5, \"validation_size\": 8, \"snapshot_steps\": [0, 10]},\n"
        << "  \"diagnose\": {\"limit\": 8}" << extra << "\n"
        << "}\n";
    return root / "run.json";
  }
};

}  // namespace

TEST_CASE("config loading") {
  Workspace w;
  const auto cfg = load_config(w.config());
  CHECK(cfg.run_dir == w.root / "run");
  CHECK(cfg.corpus.inputs.front() == w.root / "raw.smi");
  CHECK(cfg.train.model.src_vocab == testing::smiles_vocab().size());
  CHECK(cfg.train.model.pad_id == testing::smiles_vocab().pad());
  CHECK_THROWS_AS(load_config(w.config(",\n  \"unexpected\": 1")), ConfigError);
  CHECK_THROWS_AS(load_config(w.root / "missing.json"), ConfigError);
  std::ofstream(w.root / "broken.json") << "{\"vocab\": ";
  CHECK_THROWS_AS(load_config(w.root / "broken.json"), ConfigError);
}

TEST_CASE("run directories are locked") {
  Workspace w;
  {
    RunLock lock(w.root);
    CHECK(fs::exists(w.root / ".lock"));
    CHECK_THROWS_AS(RunLock(w.root), LockHeld);
  }
  CHECK_FALSE(fs::exists(w.root / ".lock"));
}

TEST_CASE("preprocess, train, diagnose and report") {
  Workspace w;
  const auto cfg = load_config(w.config());
  cmd_preprocess(cfg, std::nullopt);
  cmd_preprocess(cfg, w.root / "again");
  for (const auto* f : {"train.tsv", "test.tsv", "canonical.txt", "length_report.csv", "report.json"}) {
    CHECK(fs::exists(w.root / "corpus" / f));
    CHECK(slurp(w.root / "corpus" / f) == slurp(w.root / "again" / f));
  }
  const auto s = cmd_train(cfg, std::nullopt, false);
  CHECK(s.steps == 10);
  CHECK(saved_checkpoints(cfg.run_dir) == std::vector<long>{0, 10});
  cmd_diagnose(cfg, std::nullopt);
  for (const auto* f : {"accuracy.csv", "similarity.csv", "chirality.csv", "teacher_forced.csv", "thresholds.json"}) {
    CHECK(fs::exists(cfg.run_dir / "diagnostics" / f));
  }
  const auto table = cmd_report(cfg);
  CHECK(table.find("perfect") != std::string::npos);
  CHECK(fs::exists(cfg.run_dir / "report.json"));
}
