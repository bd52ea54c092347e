// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/synth/generator.hpp"
#include "chemlab/training/trainer.hpp"
#include "test_support.hpp"

using namespace chemlab;
using namespace chemlab::train;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("chemlab_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<Pair> small_pairs(int count, std::uint64_t seed) {
  synth::GeneratorConfig g;
  g.count = count;
  g.seed = seed;
  g.min_heavy = 3;
  g.max_heavy = 7;
  g.salt_prob = 0.0;
  std::vector<Pair> out;
  int i = 0;
  for (const auto& s : synth::generate_smiles(g)) {
    const auto m = mol::parse_smiles(s);
    out.push_back({mol::randomized_smiles(m, static_cast<std::uint64_t>(++i)), mol::canonical_smiles(m)});
  }
  return out;
}

TrainConfig tiny(const tok::Vocabulary& v) {
  TrainConfig c;
  c.model.src_vocab = v.size();
  c.model.tgt_vocab = v.size();
  c.model.pad_id = v.pad();
  c.model.d_model = 32;
  c.model.d_ff = 64;
  c.model.n_layers = 1;
  c.model.n_heads = 2;
  c.model.dropout = 0.1;
  c.model.max_len = 64;
  c.optimizer.warmup_steps = 50;
  c.optimizer.accumulation = 2;
  c.optimizer.token_budget = 400;
  c.optimizer.max_steps = 40;
  c.eval_interval = 20;
  c.validation_size = 16;
  return c;
}

}  // namespace

TEST_CASE("train config validation and JSON") {
  const auto& v = testing::smiles_vocab();
  auto c = tiny(v);
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_init_seed() != c.effective_order_seed());
  c.init_seed = 77;
  CHECK(c.effective_init_seed() == 77);
  const nlohmann::json j = c;
  const auto back = j.get<TrainConfig>();
  CHECK(back.model.d_model == 32);
  CHECK(back.optimizer.accumulation == 2);
  CHECK(back.snapshot_thresholds == c.snapshot_thresholds);
  c.eval_interval = 0;
  CHECK_THROWS(c.validate());
  CHECK(threshold_label(0.5) == "0.50");
}

TEST_CASE("runs are deterministic and resumable") {
  const auto& v = testing::smiles_vocab();
  const auto pairs = small_pairs(120, 3);
  const auto train = tokenize_pairs({pairs.begin() + 16, pairs.end()}, v, v);
  const auto valid = tokenize_pairs({pairs.begin(), pairs.begin() + 16}, v, v);
  TempDir a("det_a");
  TempDir b("det_b");
  TempDir r("det_resume");
  auto cfg = tiny(v);
  cfg.snapshot_steps = {0, 20};
  Trainer ta(cfg, v, v, train, valid, a.path);
  const auto sa = ta.run();
  Trainer tb(cfg, v, v, train, valid, b.path);
  tb.run();
  const auto metrics = slurp(a.path / "metrics.jsonl");
  CHECK_FALSE(metrics.empty());
  CHECK(metrics == slurp(b.path / "metrics.jsonl"));
  CHECK(sa.steps == 40);
  CHECK(ta.curve().size() == 3);
  CHECK(ta.curve().front().step == 0);
  CHECK(fs::exists(a.path / "checkpoints" / "step_0000000.ckpt"));
  CHECK(fs::exists(a.path / "checkpoints" / "step_0000020.ckpt"));
  CHECK(fs::exists(a.path / "summary.json"));
  CHECK(fs::exists(a.path / "predictions" / "step_0000040.txt"));

  auto half = cfg;
  half.optimizer.max_steps = 20;
  Trainer first(half, v, v, train, valid, r.path);
  first.run();
  Trainer second(cfg, v, v, train, valid, r.path);
  second.run(true);
  CHECK(slurp(r.path / "metrics.jsonl") == metrics);

  auto other = cfg;
  other.order_seed = 999;
  Trainer tc(other, v, v, train, valid);
  tc.run();
  CHECK(tc.curve().back().loss != ta.curve().back().loss);
}

TEST_CASE("a tiny model memorizes 32 pairs and stops early") {
  const auto& v = testing::smiles_vocab();
  const auto pairs = small_pairs(32, 8);
  const auto ex = tokenize_pairs(pairs, v, v);
  auto cfg = tiny(v);
  cfg.model.d_model = 64;
  cfg.model.d_ff = 128;
  cfg.model.n_heads = 4;
  cfg.model.dropout = 0.0;
  cfg.optimizer.warmup_steps = 100;
  cfg.optimizer.lr_scale = 0.15;
  cfg.optimizer.accumulation = 1;
  cfg.optimizer.token_budget = 4096;
  cfg.optimizer.max_steps = 2000;
  cfg.optimizer.early_stop = 1.0;
  cfg.eval_interval = 50;
  cfg.validation_size = 32;
  cfg.snapshot_steps = {};
  Trainer t(cfg, v, v, ex, ex);
  const auto s = t.run();
  REQUIRE_FALSE(t.curve().empty());
  CHECK(t.curve().back().perfect_accuracy == 1.0);
  CHECK(s.early_stopped);
  CHECK(s.steps <= 2000);
  for (std::size_t i = 0; i + 1 < t.curve().size(); ++i) {
    CHECK(t.curve()[i].perfect_accuracy < 1.0);
    CHECK(t.curve()[i].step < t.curve()[i + 1].step);
  }
  CHECK(s.threshold_steps.contains("0.98"));
  MESSAGE("memorized at step " << s.steps);
}
