// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chemlab/diagnostics/metrics.hpp"
#include "chemlab/fingerprints/fingerprint.hpp"
#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::diag {

inline constexpr int kMetricsSchema = 1;

/// One evaluation of a training run.
struct MetricsRecord {
  long step = 0;
  double loss = 0;           // validation cross-entropy, eval mode
  double train_loss = 0;     // mean batch loss since the previous record
  double learning_rate = 0;
  double perfect_accuracy = 0;
  double partial_accuracy = 0;
  double validity = 0;       // fraction of predictions that are valid SMILES
  /// Mean Tanimoto over validly decoded predictions, per fingerprint name.
  std::map<std::string, double> tanimoto;
  std::map<std::string, double> masked_accuracy;
  TokenAccuracy teacher_forced;
  ChiralityBreakdown chirality;
};

void to_json(nlohmann::json& j, const MetricsRecord& r);
void from_json(const nlohmann::json& j, MetricsRecord& r);

using MetricsCurve = std::vector<MetricsRecord>;

MetricsCurve read_metrics(const std::string& path);

/// First recorded step whose perfect accuracy reaches `threshold`.
std::optional<long> step_threshold(const MetricsCurve& curve, double threshold);

/// Mean Tanimoto between each valid prediction and its target; nullopt when
/// no prediction is valid.
std::optional<double> mean_tanimoto(const std::vector<std::string>& predictions,
                                    const std::vector<mol::Molecule>& targets,
                                    const fp::FingerprintConfig& cfg);

struct SimilarityCurve {
  std::vector<long> steps;
  std::map<std::string, std::vector<double>> mean;  // per fingerprint name
  long molecules = 0;  // kept in the intersection
  long omitted = 0;    // invalid at one or more steps
  bool defined() const noexcept { return molecules > 0; }

  void write_csv(std::ostream& out) const;
};

/// Predictions per step (all the same length as `targets`). Molecules with
/// an invalid prediction at any step are dropped from every step.
SimilarityCurve similarity_curve(
    const std::vector<std::pair<long, std::vector<std::string>>>& predictions,
    const std::vector<mol::Molecule>& targets, const std::vector<fp::FingerprintConfig>& cfgs);

}  // namespace chemlab::diag
