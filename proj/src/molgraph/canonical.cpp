// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/molgraph/canonical.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::mol {

namespace {

using Key = std::vector<std::int64_t>;

int dense_rank(const std::vector<Key>& keys, std::vector<int>& ranks) {
  std::vector<int> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  ranks.assign(keys.size(), 0);
  int r = -1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i == 0 || keys[static_cast<std::size_t>(idx[i])] != keys[static_cast<std::size_t>(idx[i - 1])]) {
      ++r;
    }
    ranks[static_cast<std::size_t>(idx[i])] = r;
  }
  return r + 1;
}

int bond_code(const Bond& b) {
  return static_cast<int>(b.order) * 2 + (b.direction == BondDirection::None ? 0 : 1);
}

int refine(const Molecule& m, std::vector<int>& ranks) {
  const auto n = static_cast<std::size_t>(m.atom_count());
  int classes = ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
  std::vector<Key> keys(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& key = keys[i];
      key.clear();
      key.push_back(ranks[i]);
      const auto nbs = m.neighbors(static_cast<int>(i));
      const auto start = key.size();
      for (const auto& nb : nbs) {
        key.push_back(static_cast<std::int64_t>(ranks[static_cast<std::size_t>(nb.atom)]) * 16 +
                      bond_code(m.bond(nb.bond)));
      }
      std::sort(key.begin() + static_cast<std::ptrdiff_t>(start), key.end());
    }
    std::vector<int> next;
    const int next_classes = dense_rank(keys, next);
    ranks = std::move(next);
    if (next_classes == classes) {
      return classes;
    }
    classes = next_classes;
  }
}

std::vector<int> initial_ranks(const Molecule& m) {
  const auto rings = ring_atoms(m);
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    // Degree leads so the traversal starts at a terminal atom and short
    // substituents become branches.
    keys.push_back(Key{m.degree(i), static_cast<std::int64_t>(a.element), a.aromatic ? 1 : 0, a.charge,
                       a.hydrogens, m.stereocenter_at(i) != nullptr ? 1 : 0,
                       rings[static_cast<std::size_t>(i)] ? 1 : 0});
  }
  std::vector<int> ranks;
  dense_rank(keys, ranks);
  return ranks;
}

class CanonicalSearch {
 public:
  explicit CanonicalSearch(const Molecule& m) : m_(m) {}

  std::string run() {
    auto ranks = initial_ranks(m_);
    search(std::move(ranks));
    return best_.value_or(std::string{});
  }

 private:
  void search(std::vector<int> ranks) {
    const int classes = refine(m_, ranks);
    const auto n = static_cast<int>(ranks.size());
    if (classes == n) {
      std::vector<int> order(ranks.size());
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        order[static_cast<std::size_t>(ranks[i])] = static_cast<int>(i);
      }
      auto s = write_smiles(m_, order);
      if (!best_ || s < *best_) {
        best_ = std::move(s);
      }
      return;
    }
    std::vector<int> counts(static_cast<std::size_t>(classes), 0);
    for (const int r : ranks) {
      ++counts[static_cast<std::size_t>(r)];
    }
    const int target = static_cast<int>(
        std::find_if(counts.begin(), counts.end(), [](int c) { return c > 1; }) - counts.begin());
    for (int v = 0; v < n; ++v) {
      if (ranks[static_cast<std::size_t>(v)] != target) {
        continue;
      }
      std::vector<Key> keys(ranks.size());
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        keys[i] = Key{ranks[i], static_cast<int>(i) == v ? 0 : 1};
      }
      std::vector<int> split;
      dense_rank(keys, split);
      search(std::move(split));
    }
  }

  const Molecule& m_;
  std::optional<std::string> best_;
};

}  // namespace

std::vector<int> refined_classes(const Molecule& m) {
  auto ranks = initial_ranks(m);
  refine(m, ranks);
  return ranks;
}

std::string canonical_smiles(const Molecule& m) {
  std::vector<std::string> parts;
  for (const auto& comp : connected_components(m)) {
    const Molecule fragment = extract_atoms(m, comp);
    parts.push_back(CanonicalSearch(fragment).run());
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) {
      out += '.';
    }
    out += parts[i];
  }
  return out;
}

std::string randomized_smiles(const Molecule& m, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(m.atom_count()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  return write_smiles(m, order);
}

}  // namespace chemlab::mol
