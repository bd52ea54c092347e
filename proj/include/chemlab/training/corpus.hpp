// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace chemlab::train {

enum class SamplingStrategy : std::uint8_t { StratifiedByLength, Random, ChiralityEnriched, ChiralBalanced };

std::string_view to_string(SamplingStrategy s) noexcept;
SamplingStrategy sampling_strategy_from_string(std::string_view s);

struct SamplingPlan {
  SamplingStrategy strategy = SamplingStrategy::StratifiedByLength;
  long per_length_quota = 0;  // <= 0 keeps every molecule of a length
  double achiral_keep_prob = 0.5;
  double test_fraction = 0.03;
  int max_heavy_atoms = 50;

  void validate() const;
};

void to_json(nlohmann::json& j, const SamplingPlan& p);
void from_json(const nlohmann::json& j, SamplingPlan& p);

class EmptyAfterFilter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Randomized source SMILES and its canonical target.
struct Pair {
  std::string source;
  std::string target;
};

struct CorpusReport {
  long raw = 0;
  long invalid = 0;
  long filtered = 0;    // outside the heavy-atom window
  long duplicates = 0;
  long sampled = 0;
  long train = 0;
  long test = 0;
};

void to_json(nlohmann::json& j, const CorpusReport& r);

struct Corpus {
  std::vector<std::string> canonical;  // every molecule kept by the filter
  std::vector<Pair> train;
  std::vector<Pair> test;
  CorpusReport report;
};

/// Stratum length of a canonical SMILES: characters, with "@@" counted once
/// so that enantiomers share a stratum.
int stratum_length(std::string_view canonical);

/// Number of "@" and "@@" tokens in a SMILES string.
std::pair<long, long> chiral_token_counts(std::string_view smiles);

/// Parse, strip to the largest fragment, validate, filter by heavy atoms,
/// deduplicate by canonical form, sample per the plan, hold out the test
/// split, then emit one randomized source per molecule.
Corpus build_corpus(const std::vector<std::string>& raw, const SamplingPlan& plan, std::uint64_t seed);

/// Keeps chiral targets always and the rest with probability keep_prob.
std::vector<Pair> enrich_chiral(const std::vector<Pair>& pairs, double keep_prob, std::uint64_t seed);

/// Removes molecules per stratum until "@" and "@@" token counts match.
std::vector<Pair> balance_chiral(const std::vector<Pair>& pairs, std::uint64_t seed);

std::vector<std::string> read_lines(const std::string& path);
void write_pairs(const std::string& path, const std::vector<Pair>& pairs);
std::vector<Pair> read_pairs(const std::string& path);

}  // namespace chemlab::train
