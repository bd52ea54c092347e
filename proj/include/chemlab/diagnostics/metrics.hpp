// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemlab/tokenizer/vocabulary.hpp"

namespace chemlab::diag {

using Sequence = std::vector<int>;

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The scored part of a sequence: a leading BOS removed, cut after the first
/// EOS (kept), trailing PAD dropped when no EOS is present.
Sequence scored_tokens(std::span<const int> seq, const tok::Vocabulary& vocab);

/// Fraction of pairs reproduced exactly through EOS.
double perfect_accuracy(const std::vector<Sequence>& preds, const std::vector<Sequence>& targets,
                        const tok::Vocabulary& vocab);

/// Mean over pairs of the fraction of target positions (through EOS) whose
/// predicted token matches; positions missing from the prediction miss.
double partial_accuracy(const std::vector<Sequence>& preds, const std::vector<Sequence>& targets,
                        const tok::Vocabulary& vocab);

/// perfect_accuracy that ignores positions where the target holds `masked`.
double masked_perfect_accuracy(const std::vector<Sequence>& preds,
                               const std::vector<Sequence>& targets, int masked,
                               const tok::Vocabulary& vocab);

/// masked_perfect_accuracy for every token occurring in the targets.
std::map<std::string, double> masked_accuracy_table(const std::vector<Sequence>& preds,
                                                    const std::vector<Sequence>& targets,
                                                    const tok::Vocabulary& vocab);

struct ChiralityBreakdown {
  long correct = 0;
  long chiral_only = 0;
  long other = 0;
  /// Token-level swaps inside chiral_only pairs.
  long at_for_atat = 0;  // target "@@", predicted "@"
  long atat_for_at = 0;  // target "@", predicted "@@"

  long total() const noexcept { return correct + chiral_only + other; }
  double fraction_correct() const;
  double fraction_chiral_only() const;
  double fraction_other() const;
};

/// correct: exact; chiral_only: equal once "@" and "@@" map to one symbol in
/// both sequences; other: anything else.
ChiralityBreakdown chirality_classification(const std::vector<Sequence>& preds,
                                            const std::vector<Sequence>& targets,
                                            const tok::Vocabulary& vocab);

struct TokenTally {
  long hits = 0;
  long total = 0;
  double accuracy() const { return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
};

/// Per-token tallies keyed by token string.
using TokenAccuracy = std::map<std::string, TokenTally>;

}  // namespace chemlab::diag
