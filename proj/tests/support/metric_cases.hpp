// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "chemlab/diagnostics/metrics.hpp"
#include "chemlab/tokenizer/vocabulary.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::testing {

struct MetricCase {
  std::vector<diag::Sequence> preds;
  std::vector<diag::Sequence> targets;
};

// Targets are BOS + payload + EOS over a small alphabet rich in chiral
// markers; predictions are exact copies, chiral swaps, substitutions,
// truncations, insertions, or junk after EOS.
inline MetricCase random_metric_case(const tok::Vocabulary& v, Rng& rng) {
  const std::vector<std::string> alphabet{"C", "c", "N", "O", "1", "2", "(", ")", "=", "@", "@@", "[", "]", "H"};
  std::vector<int> ids;
  for (const auto& t : alphabet) {
    ids.push_back(*v.id(t));
  }
  const int at = *v.id("@");
  const int atat = *v.id("@@");
  const auto pick = [&] { return ids[rng.below(ids.size())]; };
  MetricCase c;
  const auto n = 1 + rng.below(16);
  for (std::uint64_t i = 0; i < n; ++i) {
    diag::Sequence t{v.bos()};
    const auto len = rng.below(20);
    for (std::uint64_t k = 0; k < len; ++k) {
      t.push_back(pick());
    }
    t.push_back(v.eos());
    diag::Sequence p = t;
    switch (rng.below(7)) {
      case 0:
        break;
      case 1:
        for (auto& x : p) {
          if ((x == at || x == atat) && rng.bernoulli(0.6)) {
            x = x == at ? atat : at;
          }
        }
        break;
      case 2:
        if (p.size() > 2) {
          p[1 + rng.below(p.size() - 2)] = pick();
        }
        break;
      case 3:
        p.resize(rng.below(p.size() + 1));
        break;
      case 4:
        p.insert(p.begin() + static_cast<std::ptrdiff_t>(1 + rng.below(p.size() - 1)), pick());
        break;
      case 5:
        for (int k = 0; k < 3; ++k) {
          p.push_back(pick());
        }
        break;
      default:
        p = {v.bos()};
        for (std::uint64_t k = rng.below(25); k > 0; --k) {
          p.push_back(pick());
        }
        if (rng.bernoulli(0.5)) {
          p.push_back(v.eos());
        }
    }
    if (rng.bernoulli(0.2)) {
      p.push_back(v.pad());
      t.push_back(v.pad());
    }
    c.preds.push_back(std::move(p));
    c.targets.push_back(std::move(t));
  }
  return c;
}

}  // namespace chemlab::testing
