// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace chemlab::tok {

class SequenceTooLong : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PairLength {
  int src = 0;
  int tgt = 0;
};

/// Example indices sharing one padded (src_len x tgt_len) block.
struct Batch {
  std::vector<int> indices;
  int src_len = 0;
  int tgt_len = 0;

  /// Source plus target tokens after padding every row to the batch maximum.
  long padded_tokens() const noexcept {
    return static_cast<long>(indices.size()) * (src_len + tgt_len);
  }
};

struct BucketConfig {
  long token_budget = 4096;
  int bucket_width = 8;
};

/// Groups examples into length ranges of `bucket_width` tokens (by the longer
/// side), shuffles within each range, packs batches whose padded token count
/// stays within the budget, then shuffles batch order. Every index appears in
/// exactly one batch. Throws SequenceTooLong if one pair alone exceeds the
/// budget.
std::vector<Batch> bucket_batches(std::span<const PairLength> lengths, const BucketConfig& cfg,
                                  std::uint64_t seed);

/// JSON-lines manifest, one batch per line.
void write_manifest(const std::filesystem::path& path, std::span<const Batch> batches);
std::vector<Batch> read_manifest(const std::filesystem::path& path);

}  // namespace chemlab::tok
