// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemlab/cli/config.hpp"

namespace chemlab::cli {

/// Exclusive marker file in a run directory, removed on destruction.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

class LockHeld : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthOptions {
  int count = 1000;
  int max_heavy = 20;
  std::uint64_t seed = 1;
  fs::path out;
};

/// Writes randomized SMILES for synthetic molecules, one per line.
void cmd_synth(const SynthOptions& opt);

/// Writes canonical.txt, train.tsv, test.tsv, report.json and
/// length_report.csv under the corpus directory (or `out`).
void cmd_preprocess(const RunConfig& cfg, const std::optional<fs::path>& out);

/// Trains from <corpus>/train.tsv with <corpus>/test.tsv as validation.
train::TrainSummary cmd_train(const RunConfig& cfg, const std::optional<fs::path>& out, bool resume);

/// Decodes the test pairs with every selected checkpoint and writes curve,
/// masked, teacher-forced, chirality and agreement tables to
/// <run>/diagnostics (or `out`).
void cmd_diagnose(const RunConfig& cfg, const std::optional<fs::path>& out);

/// Probe results per dataset under <run>/probe (or `out`).
void cmd_probe(const RunConfig& cfg, const std::optional<fs::path>& out);

/// Short text summary of a run, also written as <run>/report.json.
std::string cmd_report(const RunConfig& cfg);

/// Steps of the checkpoints saved under <run>/checkpoints, ascending.
std::vector<long> saved_checkpoints(const fs::path& run_dir);
fs::path checkpoint_path(const fs::path& run_dir, long step);

}  // namespace chemlab::cli
