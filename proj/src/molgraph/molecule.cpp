// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/molgraph/molecule.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

namespace chemlab::mol {

namespace {

struct ElementInfo {
  Element element;
  std::string_view symbol;
  int valence_electrons;
  bool aromatic_form;
};

constexpr std::array<ElementInfo, 11> kElements{{
    {Element::H, "H", 1, false},
    {Element::B, "B", 3, true},
    {Element::C, "C", 4, true},
    {Element::N, "N", 5, true},
    {Element::O, "O", 6, true},
    {Element::F, "F", 7, false},
    {Element::P, "P", 5, true},
    {Element::S, "S", 6, true},
    {Element::Cl, "Cl", 7, false},
    {Element::Br, "Br", 7, false},
    {Element::I, "I", 7, false},
}};

const ElementInfo& info(Element e) { return kElements[static_cast<std::size_t>(e)]; }

}  // namespace

std::string_view symbol(Element e) noexcept { return info(e).symbol; }

std::optional<Element> element_from_symbol(std::string_view s) noexcept {
  for (const auto& entry : kElements) {
    if (entry.symbol == s) {
      return entry.element;
    }
  }
  return std::nullopt;
}

bool supports_aromatic(Element e) noexcept { return info(e).aromatic_form; }

BondDirection flipped(BondDirection d) noexcept {
  switch (d) {
    case BondDirection::Up:
      return BondDirection::Down;
    case BondDirection::Down:
      return BondDirection::Up;
    case BondDirection::None:
      break;
  }
  return BondDirection::None;
}

Chirality inverted(Chirality c) noexcept {
  return c == Chirality::Clockwise ? Chirality::CounterClockwise : Chirality::Clockwise;
}

bool is_odd_permutation(const std::array<int, 4>& from, const std::array<int, 4>& to) {
  std::array<int, 4> index{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto it = std::find(from.begin(), from.end(), to[i]);
    if (it == from.end()) {
      throw std::invalid_argument("neighbor lists are not permutations of each other");
    }
    index[i] = static_cast<int>(it - from.begin());
  }
  int inversions = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (index[i] == index[j]) {
        throw std::invalid_argument("neighbor list has repeated entries");
      }
      if (index[i] > index[j]) {
        ++inversions;
      }
    }
  }
  return inversions % 2 == 1;
}

Chirality TetrahedralCenter::chirality_for(const std::array<int, 4>& order) const {
  return is_odd_permutation(neighbors, order) ? inverted(chirality) : chirality;
}

int Molecule::add_atom(const Atom& atom) {
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  center_of_atom_.push_back(-1);
  return atom_count() - 1;
}

int Molecule::add_bond(int a, int b, BondOrder order, BondDirection direction) {
  if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count()) {
    throw std::invalid_argument("bond endpoint out of range");
  }
  if (a == b) {
    throw std::invalid_argument("bond endpoints must differ");
  }
  if (find_bond(a, b)) {
    throw std::invalid_argument("duplicate bond");
  }
  bonds_.push_back(Bond{a, b, order, direction});
  const int id = bond_count() - 1;
  adjacency_[static_cast<std::size_t>(a)].push_back(Neighbor{b, id});
  adjacency_[static_cast<std::size_t>(b)].push_back(Neighbor{a, id});
  return id;
}

void Molecule::add_stereocenter(const TetrahedralCenter& center) {
  if (center.atom < 0 || center.atom >= atom_count()) {
    throw std::invalid_argument("stereocenter atom out of range");
  }
  if (center_of_atom_[static_cast<std::size_t>(center.atom)] >= 0) {
    throw std::invalid_argument("atom already has a stereocenter");
  }
  const int deg = degree(center.atom);
  if (deg < 3 || deg > 4) {
    throw std::invalid_argument("stereocenter atom must have degree 3 or 4");
  }
  int placeholders = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const int ref = center.neighbors[i];
    if (ref == kImplicitNeighbor) {
      ++placeholders;
      continue;
    }
    if (!find_bond(center.atom, ref)) {
      throw std::invalid_argument("stereocenter references a non-neighbor");
    }
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (center.neighbors[j] == ref) {
        throw std::invalid_argument("stereocenter repeats a neighbor");
      }
    }
  }
  if (placeholders != 4 - deg) {
    throw std::invalid_argument("stereocenter must list every neighbor exactly once");
  }
  center_of_atom_[static_cast<std::size_t>(center.atom)] = static_cast<int>(centers_.size());
  centers_.push_back(center);
}

int Molecule::heavy_atom_count() const noexcept {
  return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(),
                                        [](const Atom& a) { return a.element != Element::H; }));
}

std::optional<int> Molecule::find_bond(int a, int b) const {
  if (a < 0 || a >= atom_count()) {
    return std::nullopt;
  }
  for (const auto& nb : neighbors(a)) {
    if (nb.atom == b) {
      return nb.bond;
    }
  }
  return std::nullopt;
}

const TetrahedralCenter* Molecule::stereocenter_at(int atom) const {
  const int idx = center_of_atom_[static_cast<std::size_t>(atom)];
  return idx < 0 ? nullptr : &centers_[static_cast<std::size_t>(idx)];
}

void Molecule::clear_stereocenter(int atom) {
  const int idx = center_of_atom_[static_cast<std::size_t>(atom)];
  if (idx < 0) {
    return;
  }
  centers_.erase(centers_.begin() + idx);
  std::fill(center_of_atom_.begin(), center_of_atom_.end(), -1);
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    center_of_atom_[static_cast<std::size_t>(centers_[i].atom)] = static_cast<int>(i);
  }
}

int Molecule::bond_order_sum(int i) const {
  int sum = 0;
  for (const auto& nb : neighbors(i)) {
    const auto order = bond(nb.bond).order;
    sum += order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
  }
  return sum;
}

bool Molecule::has_aromatic_bond(int i) const {
  return std::any_of(neighbors(i).begin(), neighbors(i).end(), [&](const Neighbor& nb) {
    return bond(nb.bond).order == BondOrder::Aromatic;
  });
}

std::vector<std::vector<int>> connected_components(const Molecule& m) {
  std::vector<int> label(static_cast<std::size_t>(m.atom_count()), -1);
  std::vector<std::vector<int>> components;
  for (int start = 0; start < m.atom_count(); ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) {
      continue;
    }
    const int id = static_cast<int>(components.size());
    auto& comp = components.emplace_back();
    std::vector<int> stack{start};
    label[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      comp.push_back(a);
      for (const auto& nb : m.neighbors(a)) {
        if (label[static_cast<std::size_t>(nb.atom)] < 0) {
          label[static_cast<std::size_t>(nb.atom)] = id;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return components;
}

Molecule extract_atoms(const Molecule& m, std::span<const int> atoms) {
  std::vector<int> remap(static_cast<std::size_t>(m.atom_count()), -1);
  Molecule out;
  for (const int a : atoms) {
    remap[static_cast<std::size_t>(a)] = out.add_atom(m.atom(a));
  }
  for (const auto& b : m.bonds()) {
    const int nb = remap[static_cast<std::size_t>(b.begin)];
    const int ne = remap[static_cast<std::size_t>(b.end)];
    if (nb >= 0 && ne >= 0) {
      out.add_bond(nb, ne, b.order, b.direction);
    }
  }
  for (const auto& c : m.stereocenters()) {
    const int center = remap[static_cast<std::size_t>(c.atom)];
    if (center < 0) {
      continue;
    }
    TetrahedralCenter mapped{center, {}, c.chirality};
    bool complete = m.degree(c.atom) == out.degree(center);
    for (std::size_t i = 0; i < 4 && complete; ++i) {
      const int ref = c.neighbors[i];
      mapped.neighbors[i] = ref == kImplicitNeighbor ? kImplicitNeighbor
                                                     : remap[static_cast<std::size_t>(ref)];
    }
    if (complete) {
      out.add_stereocenter(mapped);
    }
  }
  return out;
}

std::vector<bool> ring_bonds(const Molecule& m) {
  const auto n = static_cast<std::size_t>(m.atom_count());
  std::vector<int> disc(n, -1);
  std::vector<int> low(n, 0);
  std::vector<bool> bridge(static_cast<std::size_t>(m.bond_count()), false);
  int timer = 0;

  std::function<void(int, int)> dfs = [&](int v, int parent_bond) {
    disc[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = timer++;
    for (const auto& nb : m.neighbors(v)) {
      if (nb.bond == parent_bond) {
        continue;
      }
      const auto u = static_cast<std::size_t>(nb.atom);
      if (disc[u] < 0) {
        dfs(nb.atom, nb.bond);
        low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], low[u]);
        if (low[u] > disc[static_cast<std::size_t>(v)]) {
          bridge[static_cast<std::size_t>(nb.bond)] = true;
        }
      } else {
        low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], disc[u]);
      }
    }
  };
  for (int v = 0; v < m.atom_count(); ++v) {
    if (disc[static_cast<std::size_t>(v)] < 0) {
      dfs(v, -1);
    }
  }
  std::vector<bool> in_ring(bridge.size());
  for (std::size_t i = 0; i < bridge.size(); ++i) {
    in_ring[i] = !bridge[i];
  }
  return in_ring;
}

std::vector<bool> ring_atoms(const Molecule& m) {
  const auto rb = ring_bonds(m);
  std::vector<bool> atoms(static_cast<std::size_t>(m.atom_count()), false);
  for (int i = 0; i < m.bond_count(); ++i) {
    if (rb[static_cast<std::size_t>(i)]) {
      atoms[static_cast<std::size_t>(m.bond(i).begin)] = true;
      atoms[static_cast<std::size_t>(m.bond(i).end)] = true;
    }
  }
  return atoms;
}

std::vector<int> allowed_valences(Element e, int charge) {
  if (e == Element::H) {
    return charge == 0 ? std::vector<int>{1} : std::vector<int>{0};
  }
  const int electrons = info(e).valence_electrons - charge;
  if (electrons < 0 || electrons > 8) {
    return {};
  }
  const int base = electrons <= 4 ? electrons : 8 - electrons;
  std::vector<int> out{base};
  if ((e == Element::P || e == Element::S) && electrons >= 5) {
    for (int v = base + 2; v <= std::min(electrons, 6); v += 2) {
      out.push_back(v);
    }
  }
  return out;
}

int default_hydrogens(const Molecule& m, int atom) {
  const auto& a = m.atom(atom);
  const auto valences = allowed_valences(a.element, 0);
  if (valences.empty() || a.element == Element::H) {
    return 0;
  }
  const int sum = m.bond_order_sum(atom);
  if (a.aromatic) {
    return std::max(0, valences.front() - sum - 1);
  }
  for (const int v : valences) {
    if (v >= sum) {
      return v - sum;
    }
  }
  return 0;
}

}  // namespace chemlab::mol
