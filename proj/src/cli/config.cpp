// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/cli/config.hpp"

#include <fstream>
#include <set>

#include "chemlab/tokenizer/vocabulary.hpp"

namespace chemlab::cli {

namespace {

void check_keys(const nlohmann::json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config " + path.string());
  }
  RunConfig cfg;
  const auto base = fs::absolute(path).parent_path();
  try {
    cfg.raw = nlohmann::json::parse(in, nullptr, true, true);
    const auto& j = cfg.raw;
    check_keys(j, "config", {"vocab", "corpus", "train", "run_dir", "diagnose", "probe"});

    const auto vocab = j.value("vocab", nlohmann::json::object());
    check_keys(vocab, "vocab", {"source", "target"});
    cfg.source_vocab = resolve(base, vocab.value("source", "../data/vocab/smiles.txt"));
    cfg.target_vocab = resolve(base, vocab.value("target", "../data/vocab/smiles.txt"));

    const auto corpus = j.value("corpus", nlohmann::json::object());
    check_keys(corpus, "corpus", {"inputs", "dir", "plan", "seed"});
    for (const auto& p : corpus.value("inputs", std::vector<std::string>{})) {
      cfg.corpus.inputs.push_back(resolve(base, p));
    }
    cfg.corpus.dir = resolve(base, corpus.value("dir", "corpus"));
    cfg.corpus.plan = corpus.value("plan", nlohmann::json::object()).get<train::SamplingPlan>();
    cfg.corpus.seed = corpus.value("seed", std::uint64_t{1});

    cfg.run_dir = resolve(base, j.value("run_dir", "run"));

    if (j.contains("train")) {
      auto t = j.at("train");
      auto& model = t["model"];
      if (!model.is_object()) {
        model = nlohmann::json::object();
      }
      // Vocabulary-dependent sizes come from the vocab files unless set.
      if (!model.contains("src_vocab") || !model.contains("tgt_vocab") || !model.contains("pad_id")) {
        const auto src = tok::Vocabulary::load(cfg.source_vocab);
        const auto tgt = tok::Vocabulary::load(cfg.target_vocab);
        if (!model.contains("src_vocab")) model["src_vocab"] = src.size();
        if (!model.contains("tgt_vocab")) model["tgt_vocab"] = tgt.size();
        if (!model.contains("pad_id")) model["pad_id"] = tgt.pad();
      }
      cfg.train = t.get<train::TrainConfig>();
    }

    const auto diag = j.value("diagnose", nlohmann::json::object());
    check_keys(diag, "diagnose", {"pairs", "limit", "steps"});
    if (diag.contains("pairs")) {
      cfg.diagnose.pairs = resolve(base, diag.at("pairs").get<std::string>());
    }
    cfg.diagnose.limit = diag.value("limit", cfg.diagnose.limit);
    cfg.diagnose.steps = diag.value("steps", cfg.diagnose.steps);
    if (cfg.diagnose.limit < 1) {
      throw ConfigError("diagnose.limit must be positive");
    }

    const auto pr = j.value("probe", nlohmann::json::object());
    check_keys(pr, "probe", {"datasets", "folds", "seed", "poolings", "baselines", "steps"});
    for (const auto& d : pr.value("datasets", nlohmann::json::array())) {
      check_keys(d, "probe dataset", {"name", "path", "smiles_column", "target_column", "task", "split"});
      ProbeDataset ds;
      ds.path = resolve(base, d.at("path").get<std::string>());
      ds.name = d.value("name", ds.path.stem().string());
      ds.smiles_column = d.value("smiles_column", ds.smiles_column);
      ds.target_column = d.at("target_column").get<std::string>();
      ds.task = probe::task_type_from_string(d.at("task").get<std::string>());
      ds.split = probe::split_strategy_from_string(d.value("split", "scaffold"));
      cfg.probe.datasets.push_back(std::move(ds));
    }
    cfg.probe.folds = pr.value("folds", cfg.probe.folds);
    cfg.probe.seed = pr.value("seed", cfg.probe.seed);
    if (pr.contains("poolings")) {
      cfg.probe.poolings.clear();
      for (const auto& name : pr.at("poolings").get<std::vector<std::string>>()) {
        const auto p = nn::pooling_from_string(name);
        if (!p) {
          throw ConfigError("unknown pooling '" + name + "'");
        }
        cfg.probe.poolings.push_back(*p);
      }
    }
    cfg.probe.baselines = pr.value("baselines", cfg.probe.baselines);
    for (const auto& b : cfg.probe.baselines) {
      if (b != "ecfp" && b != "random") {
        throw ConfigError("unknown baseline '" + b + "'");
      }
    }
    cfg.probe.steps = pr.value("steps", cfg.probe.steps);
    if (cfg.probe.folds < 2) {
      throw ConfigError("probe.folds must be at least 2");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return cfg;
}

}  // namespace chemlab::cli
