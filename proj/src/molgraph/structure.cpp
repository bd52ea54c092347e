// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/molgraph/structure.hpp"

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

#include "chemlab/molgraph/canonical.hpp"

namespace chemlab::mol {

Molecule strip_fragments(const Molecule& m) {
  const auto comps = connected_components(m);
  if (comps.size() <= 1) {
    return m;
  }
  std::optional<Molecule> best;
  int best_heavy = -1;
  std::string best_key;
  for (const auto& comp : comps) {
    Molecule frag = extract_atoms(m, comp);
    const int heavy = frag.heavy_atom_count();
    if (heavy < best_heavy) {
      continue;
    }
    std::string key = canonical_smiles(frag);
    if (heavy > best_heavy || key < best_key) {
      best_heavy = heavy;
      best_key = std::move(key);
      best = std::move(frag);
    }
  }
  return *best;
}

bool passes_corpus_filter(const Molecule& m) {
  const int heavy = m.heavy_atom_count();
  return heavy >= kMinHeavyAtoms && heavy <= kMaxHeavyAtoms;
}

namespace {

auto atom_label(const Molecule& m, int i) {
  const auto& a = m.atom(i);
  return std::make_tuple(a.element, a.aromatic, a.charge, a.hydrogens, m.degree(i),
                         m.stereocenter_at(i) != nullptr);
}

class IsoSearch {
 public:
  IsoSearch(const Molecule& a, const Molecule& b)
      : a_(a), b_(b), map_(static_cast<std::size_t>(a.atom_count()), -1),
        used_(static_cast<std::size_t>(b.atom_count()), false) {
    order_ = traversal_order();
  }

  bool run() { return extend(0); }

 private:
  // BFS per component so every atom after the first in a component has an
  // already-mapped neighbor.
  std::vector<int> traversal_order() const {
    std::vector<int> order;
    std::vector<bool> seen(static_cast<std::size_t>(a_.atom_count()), false);
    for (int s = 0; s < a_.atom_count(); ++s) {
      if (seen[static_cast<std::size_t>(s)]) {
        continue;
      }
      seen[static_cast<std::size_t>(s)] = true;
      const auto head = order.size();
      order.push_back(s);
      for (auto q = head; q < order.size(); ++q) {
        for (const auto& nb : a_.neighbors(order[q])) {
          if (!seen[static_cast<std::size_t>(nb.atom)]) {
            seen[static_cast<std::size_t>(nb.atom)] = true;
            order.push_back(nb.atom);
          }
        }
      }
    }
    return order;
  }

  bool compatible(int u, int v) const {
    if (atom_label(a_, u) != atom_label(b_, v)) {
      return false;
    }
    for (const auto& nb : a_.neighbors(u)) {
      const int w = map_[static_cast<std::size_t>(nb.atom)];
      if (w < 0) {
        continue;
      }
      const auto eb = b_.find_bond(v, w);
      if (!eb) {
        return false;
      }
      const auto& ba = a_.bond(nb.bond);
      const auto& bb = b_.bond(*eb);
      if (ba.order != bb.order || ba.direction_from(u) != bb.direction_from(v)) {
        return false;
      }
    }
    return true;
  }

  int mapped(int x) const { return x == kImplicitNeighbor ? x : map_[static_cast<std::size_t>(x)]; }

  bool center_consistent(int u) const {
    const auto* ca = a_.stereocenter_at(u);
    if (ca == nullptr) {
      return true;
    }
    std::array<int, 4> image{};
    for (std::size_t k = 0; k < 4; ++k) {
      image[k] = mapped(ca->neighbors[k]);
      if (ca->neighbors[k] != kImplicitNeighbor && image[k] < 0) {
        return true;  // checked once the last neighbor is placed
      }
    }
    const auto* cb = b_.stereocenter_at(mapped(u));
    return cb != nullptr && cb->chirality_for(image) == ca->chirality;
  }

  bool stereo_ok(int u) const {
    if (!center_consistent(u)) {
      return false;
    }
    for (const auto& nb : a_.neighbors(u)) {
      if (map_[static_cast<std::size_t>(nb.atom)] >= 0 && !center_consistent(nb.atom)) {
        return false;
      }
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) {
      return true;
    }
    const int u = order_[depth];
    std::vector<int> candidates;
    int anchor = -1;
    for (const auto& nb : a_.neighbors(u)) {
      if (map_[static_cast<std::size_t>(nb.atom)] >= 0) {
        anchor = map_[static_cast<std::size_t>(nb.atom)];
        break;
      }
    }
    if (anchor >= 0) {
      for (const auto& nb : b_.neighbors(anchor)) {
        candidates.push_back(nb.atom);
      }
    } else {
      for (int v = 0; v < b_.atom_count(); ++v) {
        candidates.push_back(v);
      }
    }
    for (const int v : candidates) {
      if (used_[static_cast<std::size_t>(v)] || !compatible(u, v)) {
        continue;
      }
      map_[static_cast<std::size_t>(u)] = v;
      used_[static_cast<std::size_t>(v)] = true;
      if (stereo_ok(u) && extend(depth + 1)) {
        return true;
      }
      map_[static_cast<std::size_t>(u)] = -1;
      used_[static_cast<std::size_t>(v)] = false;
    }
    return false;
  }

  const Molecule& a_;
  const Molecule& b_;
  std::vector<int> map_;
  std::vector<bool> used_;
  std::vector<int> order_;
};

}  // namespace

bool stereo_isomorphic(const Molecule& a, const Molecule& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count() ||
      a.stereocenters().size() != b.stereocenters().size()) {
    return false;
  }
  std::vector<decltype(atom_label(a, 0))> la;
  std::vector<decltype(atom_label(b, 0))> lb;
  for (int i = 0; i < a.atom_count(); ++i) {
    la.push_back(atom_label(a, i));
    lb.push_back(atom_label(b, i));
  }
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  if (la != lb) {
    return false;
  }
  return IsoSearch(a, b).run();
}

Molecule murcko_scaffold(const Molecule& m) {
  const auto n = static_cast<std::size_t>(m.atom_count());
  std::vector<bool> alive(n, true);
  std::vector<int> degree(n);
  std::vector<int> extra_h(n, 0);
  std::vector<bool> lost(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    degree[i] = m.degree(static_cast<int>(i));
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || degree[i] > 1) {
        continue;
      }
      alive[i] = false;
      changed = true;
      for (const auto& nb : m.neighbors(static_cast<int>(i))) {
        const auto j = static_cast<std::size_t>(nb.atom);
        if (!alive[j]) {
          continue;
        }
        --degree[j];
        lost[j] = true;
        const auto order = m.bond(nb.bond).order;
        extra_h[j] += order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
      }
    }
  }
  std::vector<int> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) {
      keep.push_back(static_cast<int>(i));
    }
  }
  Molecule base = m;
  for (const int i : keep) {
    base.atom(i).hydrogens += extra_h[static_cast<std::size_t>(i)];
    if (lost[static_cast<std::size_t>(i)]) {
      base.clear_stereocenter(i);
    }
  }
  for (int b = 0; b < base.bond_count(); ++b) {
    base.bond(b).direction = BondDirection::None;
  }
  return extract_atoms(base, keep);
}

std::string scaffold_key(const Molecule& m) {
  const Molecule scaffold = murcko_scaffold(m);
  return scaffold.empty() ? std::string(kEmptyScaffoldKey) : canonical_smiles(scaffold);
}

}  // namespace chemlab::mol
