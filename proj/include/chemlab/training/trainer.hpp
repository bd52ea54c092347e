// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemlab/diagnostics/curves.hpp"
#include "chemlab/tokenizer/vocabulary.hpp"
#include "chemlab/training/corpus.hpp"
#include "chemlab/training/optimizer.hpp"
#include "chemlab/transformer/model.hpp"

namespace chemlab::train {

class DivergenceDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Example {
  diag::Sequence src;
  diag::Sequence tgt;
};

std::vector<Example> tokenize_pairs(const std::vector<Pair>& pairs, const tok::Vocabulary& src_vocab,
                                    const tok::Vocabulary& tgt_vocab);

struct TrainConfig {
  nn::ModelConfig model;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 0;   // 0 derives from seed
  std::uint64_t order_seed = 0;  // 0 derives from seed
  long eval_interval = 200;
  int validation_size = 512;
  int bucket_width = 8;
  int eval_batch_rows = 256;
  std::vector<double> snapshot_thresholds{0.2, 0.5, 0.7, 0.9, 0.95, 0.98};
  std::vector<long> snapshot_steps{0};

  std::uint64_t effective_init_seed() const noexcept;
  std::uint64_t effective_order_seed() const noexcept;
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainSummary {
  long steps = 0;
  long epochs = 0;  // completed passes over the training pairs
  bool early_stopped = false;
  std::map<std::string, long> threshold_steps;  // "0.50" -> first step reaching it
  std::vector<long> checkpoints;
};

void to_json(nlohmann::json& j, const TrainSummary& s);

/// Runs the training loop. With a run directory, writes config.json,
/// metrics.jsonl, predictions/step_N.txt, checkpoints/step_N.ckpt,
/// latest.ckpt and summary.json there.
class Trainer {
 public:
  Trainer(TrainConfig cfg, const tok::Vocabulary& src_vocab, const tok::Vocabulary& tgt_vocab,
          std::vector<Example> train, std::vector<Example> valid, std::filesystem::path run_dir = {});
  ~Trainer();

  /// Continues from run_dir/latest.ckpt when `resume` is set and it exists.
  TrainSummary run(bool resume = false);

  const diag::MetricsCurve& curve() const noexcept { return curve_; }
  nn::Model<float>& model() noexcept { return *model_; }

  std::function<void(const diag::MetricsRecord&)> on_eval;

 private:
  struct State;

  diag::MetricsRecord evaluate(long step, double train_loss);
  void record(const diag::MetricsRecord& r, const std::vector<std::string>& predictions);
  void save(const std::filesystem::path& path) const;
  void load_latest();
  void write_summary() const;

  TrainConfig cfg_;
  const tok::Vocabulary& src_vocab_;
  const tok::Vocabulary& tgt_vocab_;
  std::vector<Example> train_;
  std::vector<Example> valid_;
  std::vector<mol::Molecule> valid_targets_;
  std::filesystem::path dir_;
  std::unique_ptr<nn::Model<float>> model_;
  std::unique_ptr<Adam<float>> adam_;
  std::unique_ptr<State> state_;
  diag::MetricsCurve curve_;
  TrainSummary summary_;
};

/// Threshold label used in summaries, e.g. "0.50".
std::string threshold_label(double t);

}  // namespace chemlab::train
