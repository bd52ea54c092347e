// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/diagnostics/evaluation.hpp"

#include <algorithm>

namespace chemlab::diag {

namespace {

std::vector<Sequence> slice(const std::vector<Sequence>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

}  // namespace

std::vector<Sequence> greedy_predictions(nn::Model<float>& model, const std::vector<Sequence>& sources,
                                         const tok::Vocabulary& target_vocab, int max_len,
                                         int batch_rows) {
  std::vector<Sequence> out;
  out.reserve(sources.size());
  const int pad = model.config().pad_id;
  for (std::size_t i = 0; i < sources.size(); i += static_cast<std::size_t>(batch_rows)) {
    const auto end = std::min(sources.size(), i + static_cast<std::size_t>(batch_rows));
    const auto src = nn::TokenBatch::pack(slice(sources, i, end), pad);
    auto decoded = model.greedy_decode(src, target_vocab.bos(), target_vocab.eos(), max_len);
    for (auto& d : decoded) {
      out.push_back(std::move(d));
    }
  }
  return out;
}

TokenAccuracy charwise_tf_accuracy(nn::Model<float>& model, const std::vector<Sequence>& sources,
                                   const std::vector<Sequence>& targets,
                                   const tok::Vocabulary& target_vocab, int batch_rows) {
  if (sources.size() != targets.size()) {
    throw LengthMismatch("source and target lists differ in length");
  }
  TokenAccuracy out;
  const int pad = model.config().pad_id;
  for (std::size_t i = 0; i < sources.size(); i += static_cast<std::size_t>(batch_rows)) {
    const auto end = std::min(sources.size(), i + static_cast<std::size_t>(batch_rows));
    const auto src = nn::TokenBatch::pack(slice(sources, i, end), pad);
    const auto tgt = nn::TokenBatch::pack(slice(targets, i, end), pad);
    const auto logits = model.teacher_forced_logits(src, tgt);
    const int steps = tgt.len - 1;
    for (int r = 0; r < tgt.rows; ++r) {
      for (int t = 0; t < steps; ++t) {
        const int label = tgt.at(r, t + 1);
        if (label == pad) {
          continue;
        }
        Eigen::Index best = 0;
        logits.row(static_cast<Eigen::Index>(r) * steps + t).maxCoeff(&best);
        auto& tally = out[target_vocab.token(label)];
        ++tally.total;
        tally.hits += best == label ? 1 : 0;
      }
    }
  }
  return out;
}

}  // namespace chemlab::diag
