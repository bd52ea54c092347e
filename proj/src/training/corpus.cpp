// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/training/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/structure.hpp"
#include "chemlab/molgraph/validate.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::train {

std::string_view to_string(SamplingStrategy s) noexcept {
  switch (s) {
    case SamplingStrategy::StratifiedByLength:
      return "stratified_by_length";
    case SamplingStrategy::Random:
      return "random";
    case SamplingStrategy::ChiralityEnriched:
      return "chirality_enriched";
    case SamplingStrategy::ChiralBalanced:
      return "chiral_balanced";
  }
  return "unknown";
}

SamplingStrategy sampling_strategy_from_string(std::string_view s) {
  for (const auto k : {SamplingStrategy::StratifiedByLength, SamplingStrategy::Random,
                       SamplingStrategy::ChiralityEnriched, SamplingStrategy::ChiralBalanced}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw std::invalid_argument("unknown sampling strategy '" + std::string(s) + "'");
}

void SamplingPlan::validate() const {
  const auto rate = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!rate(achiral_keep_prob) || !rate(test_fraction)) {
    throw std::invalid_argument("sampling rates must lie in [0, 1]");
  }
  if (max_heavy_atoms < mol::kMinHeavyAtoms || max_heavy_atoms > mol::kMaxHeavyAtoms) {
    throw std::invalid_argument("max_heavy_atoms must lie in [3, 50]");
  }
}

void to_json(nlohmann::json& j, const SamplingPlan& p) {
  j = {{"strategy", to_string(p.strategy)},
       {"per_length_quota", p.per_length_quota},
       {"achiral_keep_prob", p.achiral_keep_prob},
       {"test_fraction", p.test_fraction},
       {"max_heavy_atoms", p.max_heavy_atoms}};
}

void from_json(const nlohmann::json& j, SamplingPlan& p) {
  SamplingPlan d;
  p.strategy = sampling_strategy_from_string(j.value("strategy", std::string(to_string(d.strategy))));
  p.per_length_quota = j.value("per_length_quota", d.per_length_quota);
  p.achiral_keep_prob = j.value("achiral_keep_prob", d.achiral_keep_prob);
  p.test_fraction = j.value("test_fraction", d.test_fraction);
  p.max_heavy_atoms = j.value("max_heavy_atoms", d.max_heavy_atoms);
  p.validate();
}

void to_json(nlohmann::json& j, const CorpusReport& r) {
  j = {{"raw", r.raw},         {"invalid", r.invalid}, {"filtered", r.filtered},
       {"duplicates", r.duplicates}, {"sampled", r.sampled}, {"train", r.train},
       {"test", r.test}};
}

int stratum_length(std::string_view canonical) {
  int n = 0;
  for (std::size_t i = 0; i < canonical.size(); ++i) {
    if (canonical[i] == '@' && i + 1 < canonical.size() && canonical[i + 1] == '@') {
      ++i;
    }
    ++n;
  }
  return n;
}

std::pair<long, long> chiral_token_counts(std::string_view smiles) {
  long at = 0;
  long atat = 0;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (smiles[i] != '@') {
      continue;
    }
    if (i + 1 < smiles.size() && smiles[i + 1] == '@') {
      ++atat;
      ++i;
    } else {
      ++at;
    }
  }
  return {at, atat};
}

namespace {

bool is_chiral(std::string_view smiles) { return smiles.find('@') != std::string_view::npos; }

std::vector<std::string> stratified_sample(const std::vector<std::string>& molecules, long quota,
                                           Rng& rng) {
  std::map<int, std::vector<std::string>> groups;
  for (const auto& s : molecules) {
    groups[stratum_length(s)].push_back(s);
  }
  std::vector<std::string> out;
  for (auto& [len, group] : groups) {
    rng.shuffle(group.begin(), group.end());
    const auto take = quota > 0 ? std::min<std::size_t>(group.size(), static_cast<std::size_t>(quota))
                                : group.size();
    out.insert(out.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace

Corpus build_corpus(const std::vector<std::string>& raw, const SamplingPlan& plan, std::uint64_t seed) {
  plan.validate();
  if (raw.empty()) {
    throw std::invalid_argument("build_corpus: no input molecules");
  }
  Corpus corpus;
  auto& rep = corpus.report;
  rep.raw = static_cast<long>(raw.size());

  std::vector<std::string> canonical;
  std::unordered_set<std::string> seen;
  for (const auto& line : raw) {
    std::optional<mol::Molecule> m;
    try {
      m = mol::strip_fragments(mol::parse_smiles(line));
    } catch (const std::exception&) {
      ++rep.invalid;
      continue;
    }
    if (!mol::validate_molecule(*m)) {
      ++rep.invalid;
      continue;
    }
    if (!mol::passes_corpus_filter(*m) || m->heavy_atom_count() > plan.max_heavy_atoms) {
      ++rep.filtered;
      continue;
    }
    auto key = mol::canonical_smiles(*m);
    if (!seen.insert(key).second) {
      ++rep.duplicates;
      continue;
    }
    canonical.push_back(std::move(key));
  }
  if (canonical.empty()) {
    throw EmptyAfterFilter("no molecule survived parsing and filtering");
  }

  corpus.canonical = canonical;
  Rng rng(derive_seed(seed, 0xc0));
  auto sampled = stratified_sample(canonical, plan.per_length_quota, rng);
  if (plan.strategy == SamplingStrategy::Random) {
    const auto total = sampled.size();
    sampled = canonical;
    rng.shuffle(sampled.begin(), sampled.end());
    sampled.resize(total);
    std::sort(sampled.begin(), sampled.end());
  }
  rep.sampled = static_cast<long>(sampled.size());

  rng.shuffle(sampled.begin(), sampled.end());
  const auto n_test = static_cast<std::size_t>(
      std::llround(plan.test_fraction * static_cast<double>(sampled.size())));
  const auto to_pairs = [&](std::size_t begin, std::size_t end, std::uint64_t stream) {
    std::vector<Pair> out;
    for (std::size_t i = begin; i < end; ++i) {
      const auto m = mol::parse_smiles(sampled[i]);
      out.push_back({mol::randomized_smiles(m, derive_seed(derive_seed(seed, stream), i)), sampled[i]});
    }
    return out;
  };
  corpus.test = to_pairs(0, n_test, 0x7e57);
  corpus.train = to_pairs(n_test, sampled.size(), 0x7a1a);

  if (plan.strategy == SamplingStrategy::ChiralityEnriched) {
    corpus.train = enrich_chiral(corpus.train, plan.achiral_keep_prob, derive_seed(seed, 0xe1));
  } else if (plan.strategy == SamplingStrategy::ChiralBalanced) {
    corpus.train = balance_chiral(corpus.train, derive_seed(seed, 0xba));
  }
  rep.train = static_cast<long>(corpus.train.size());
  rep.test = static_cast<long>(corpus.test.size());
  return corpus;
}

std::vector<Pair> enrich_chiral(const std::vector<Pair>& pairs, double keep_prob, std::uint64_t seed) {
  if (keep_prob < 0.0 || keep_prob > 1.0) {
    throw std::invalid_argument("keep_prob must lie in [0, 1]");
  }
  Rng rng(seed);
  std::vector<Pair> out;
  for (const auto& p : pairs) {
    const bool draw = rng.bernoulli(keep_prob);
    if (is_chiral(p.target) || draw) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Pair> balance_chiral(const std::vector<Pair>& pairs, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    strata[stratum_length(pairs[i].target)].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> removed(pairs.size(), false);
  for (auto& [len, members] : strata) {
    rng.shuffle(members.begin(), members.end());
    long d = 0;
    std::vector<long> net(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto [at, atat] = chiral_token_counts(pairs[members[k]].target);
      net[k] = at - atat;
      d += net[k];
    }
    // Each removal deletes a molecule whose imbalance has the sign of d; one
    // always exists while d != 0, so the loop ends.
    while (d != 0) {
      std::size_t pick = members.size();
      long pick_gap = 0;
      std::size_t fallback = members.size();
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (removed[members[k]] || net[k] == 0 || (net[k] > 0) != (d > 0)) {
          continue;
        }
        if (std::labs(net[k]) <= 2 * std::labs(d) - 1) {
          const long gap = std::labs(d - net[k]);
          if (pick == members.size() || gap < pick_gap) {
            pick = k;
            pick_gap = gap;
          }
        } else if (fallback == members.size() || std::labs(net[k]) < std::labs(net[fallback])) {
          fallback = k;
        }
      }
      const std::size_t k = pick != members.size() ? pick : fallback;
      removed[members[k]] = true;
      d -= net[k];
    }
  }
  std::vector<Pair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!removed[i]) {
      out.push_back(pairs[i]);
    }
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const auto cut = line.find_first_of(" \t");
    if (cut != std::string::npos) {
      line.resize(cut);
    }
    if (!line.empty()) {
      out.push_back(line);
    }
  }
  return out;
}

void write_pairs(const std::string& path, const std::vector<Pair>& pairs) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  for (const auto& p : pairs) {
    out << p.source << '\t' << p.target << '\n';
  }
}

std::vector<Pair> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::vector<Pair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ": expected source<TAB>target");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

}  // namespace chemlab::train
