// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "chemlab/diagnostics/metrics.hpp"
#include "chemlab/tokenizer/vocabulary.hpp"
#include "chemlab/transformer/model.hpp"

namespace chemlab::diag {

/// Greedy predictions for tokenized sources, decoded in chunks of
/// `batch_rows` in input order.
std::vector<Sequence> greedy_predictions(nn::Model<float>& model, const std::vector<Sequence>& sources,
                                         const tok::Vocabulary& target_vocab, int max_len,
                                         int batch_rows = 256);

/// Teacher-forced per-token accuracy: for every target position after BOS,
/// whether the argmax logit equals the target token. Keys are target tokens
/// that occur at least once.
TokenAccuracy charwise_tf_accuracy(nn::Model<float>& model, const std::vector<Sequence>& sources,
                                   const std::vector<Sequence>& targets,
                                   const tok::Vocabulary& target_vocab, int batch_rows = 256);

}  // namespace chemlab::diag
