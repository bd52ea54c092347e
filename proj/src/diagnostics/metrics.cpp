// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/diagnostics/metrics.hpp"

#include <algorithm>
#include <set>

namespace chemlab::diag {

namespace {

void check_sizes(const std::vector<Sequence>& a, const std::vector<Sequence>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("prediction and target lists differ in length");
  }
}

double ratio(long num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Sequence scored_tokens(std::span<const int> seq, const tok::Vocabulary& vocab) {
  std::size_t begin = !seq.empty() && seq.front() == vocab.bos() ? 1 : 0;
  Sequence out;
  for (std::size_t i = begin; i < seq.size(); ++i) {
    out.push_back(seq[i]);
    if (seq[i] == vocab.eos()) {
      return out;
    }
  }
  while (!out.empty() && out.back() == vocab.pad()) {
    out.pop_back();
  }
  return out;
}

double perfect_accuracy(const std::vector<Sequence>& preds, const std::vector<Sequence>& targets,
                        const tok::Vocabulary& vocab) {
  check_sizes(preds, targets);
  long hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    hits += scored_tokens(preds[i], vocab) == scored_tokens(targets[i], vocab) ? 1 : 0;
  }
  return ratio(hits, preds.size());
}

double partial_accuracy(const std::vector<Sequence>& preds, const std::vector<Sequence>& targets,
                        const tok::Vocabulary& vocab) {
  check_sizes(preds, targets);
  double sum = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = scored_tokens(preds[i], vocab);
    const auto t = scored_tokens(targets[i], vocab);
    if (t.empty()) {
      sum += p.empty() ? 1.0 : 0.0;
      continue;
    }
    long match = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      match += k < p.size() && p[k] == t[k] ? 1 : 0;
    }
    sum += static_cast<double>(match) / static_cast<double>(t.size());
  }
  return preds.empty() ? 0.0 : sum / static_cast<double>(preds.size());
}

double masked_perfect_accuracy(const std::vector<Sequence>& preds,
                               const std::vector<Sequence>& targets, int masked,
                               const tok::Vocabulary& vocab) {
  check_sizes(preds, targets);
  long hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = scored_tokens(preds[i], vocab);
    const auto t = scored_tokens(targets[i], vocab);
    bool ok = p.size() == t.size();
    for (std::size_t k = 0; ok && k < t.size(); ++k) {
      ok = t[k] == masked || p[k] == t[k];
    }
    hits += ok ? 1 : 0;
  }
  return ratio(hits, preds.size());
}

std::map<std::string, double> masked_accuracy_table(const std::vector<Sequence>& preds,
                                                    const std::vector<Sequence>& targets,
                                                    const tok::Vocabulary& vocab) {
  std::set<int> present;
  for (const auto& t : targets) {
    for (const int id : scored_tokens(t, vocab)) {
      if (!vocab.is_special(id)) {
        present.insert(id);
      }
    }
  }
  std::map<std::string, double> out;
  for (const int id : present) {
    out[vocab.token(id)] = masked_perfect_accuracy(preds, targets, id, vocab);
  }
  return out;
}

double ChiralityBreakdown::fraction_correct() const { return ratio(correct, static_cast<std::size_t>(total())); }
double ChiralityBreakdown::fraction_chiral_only() const {
  return ratio(chiral_only, static_cast<std::size_t>(total()));
}
double ChiralityBreakdown::fraction_other() const { return ratio(other, static_cast<std::size_t>(total())); }

ChiralityBreakdown chirality_classification(const std::vector<Sequence>& preds,
                                            const std::vector<Sequence>& targets,
                                            const tok::Vocabulary& vocab) {
  check_sizes(preds, targets);
  const auto at = vocab.id("@");
  const auto atat = vocab.id("@@");
  const auto is_chiral = [&](int id) { return (at && id == *at) || (atat && id == *atat); };
  ChiralityBreakdown out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = scored_tokens(preds[i], vocab);
    const auto t = scored_tokens(targets[i], vocab);
    if (p == t) {
      ++out.correct;
      continue;
    }
    bool same = p.size() == t.size();
    for (std::size_t k = 0; same && k < t.size(); ++k) {
      same = p[k] == t[k] || (is_chiral(p[k]) && is_chiral(t[k]));
    }
    if (!same) {
      ++out.other;
      continue;
    }
    ++out.chiral_only;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (p[k] != t[k]) {
        ++(t[k] == *atat ? out.at_for_atat : out.atat_for_at);
      }
    }
  }
  return out;
}

}  // namespace chemlab::diag
