// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "chemlab/probe/dataset.hpp"
#include "chemlab/tokenizer/vocabulary.hpp"
#include "chemlab/transformer/model.hpp"
#include "chemlab/transformer/pooling.hpp"

namespace chemlab::probe {

class DegenerateLabels : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kBaselineWidth = 2048;

/// Pooled encoder memory of one randomized SMILES per molecule.
Eigen::MatrixXd featurize_model(const PropertyDataset& ds, nn::Model<float>& model,
                                const tok::Vocabulary& src_vocab, nn::Pooling pooling,
                                std::uint64_t seed, int batch_rows = 128);
/// ECFP with radius 2, 2048 bits, as 0/1 columns.
Eigen::MatrixXd featurize_ecfp(const PropertyDataset& ds);
/// Uniform [0, 1) values, kBaselineWidth columns.
Eigen::MatrixXd featurize_random(const PropertyDataset& ds, std::uint64_t seed);

double rmse(std::span<const double> truth, std::span<const double> pred);
/// Area under the ROC curve via the rank-sum statistic, ties averaged.
double auroc(std::span<const double> labels, std::span<const double> scores);

struct ProbeResult {
  std::string dataset;
  std::string task;
  std::string descriptor;
  std::string predictor;
  std::string metric;
  std::vector<double> fold_scores;
  std::vector<double> fold_penalties;
  double mean = 0;
  double sd = 0;  // unbiased
  long checkpoint_step = -1;
};

void to_json(nlohmann::json& j, const ProbeResult& r);
void write_summary_csv(std::ostream& out, const std::vector<ProbeResult>& results);

/// Default penalty grid, 10^-3 .. 10^4.
std::vector<double> default_penalties();

/// Ridge (regression, scored by RMSE) or L2 logistic regression
/// (classification, scored by AUROC). Features are standardized on the
/// training part; the penalty is picked on the validation part.
ProbeResult fit_score(const Eigen::MatrixXd& features, const PropertyDataset& ds,
                      const std::vector<Fold>& folds, const std::vector<double>& penalties = default_penalties());

}  // namespace chemlab::probe
