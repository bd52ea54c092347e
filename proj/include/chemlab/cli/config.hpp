// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemlab/probe/dataset.hpp"
#include "chemlab/training/corpus.hpp"
#include "chemlab/training/trainer.hpp"
#include "chemlab/transformer/pooling.hpp"

namespace chemlab::cli {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusSection {
  std::vector<fs::path> inputs;
  fs::path dir;
  train::SamplingPlan plan;
  std::uint64_t seed = 1;
};

struct DiagnoseSection {
  fs::path pairs;  // empty: <corpus.dir>/test.tsv
  int limit = 512;
  std::vector<long> steps;  // empty: every saved checkpoint
};

struct ProbeDataset {
  std::string name;
  fs::path path;
  std::string smiles_column = "smiles";
  std::string target_column;
  probe::TaskType task = probe::TaskType::Regression;
  probe::SplitStrategy split = probe::SplitStrategy::Scaffold;
};

struct ProbeSection {
  std::vector<ProbeDataset> datasets;
  int folds = 5;
  std::uint64_t seed = 1;
  std::vector<nn::Pooling> poolings{nn::Pooling::Mean, nn::Pooling::First, nn::Pooling::Cat4,
                                    nn::Pooling::Cat6};
  std::vector<std::string> baselines{"ecfp", "random"};
  std::vector<long> steps;  // empty: every saved checkpoint
};

/// Everything a run needs. Relative paths resolve against the directory
/// holding the config file.
struct RunConfig {
  fs::path source_vocab;
  fs::path target_vocab;
  CorpusSection corpus;
  train::TrainConfig train;
  fs::path run_dir;
  DiagnoseSection diagnose;
  ProbeSection probe;
  nlohmann::json raw;
};

/// Throws ConfigError for unreadable files, malformed JSON, unknown keys or
/// invalid values.
RunConfig load_config(const fs::path& path);

}  // namespace chemlab::cli
