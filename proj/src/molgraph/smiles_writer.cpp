// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemlab/molgraph/smiles.hpp"

namespace chemlab::mol {

namespace {

struct RingBond {
  int bond;
  int opener;
  int closer;
  int digit = 0;
};

class Writer {
 public:
  Writer(const Molecule& m, std::span<const int> start_order) : m_(m) {
    const auto n = static_cast<std::size_t>(m.atom_count());
    if (start_order.size() != n) {
      throw std::invalid_argument("write_smiles: start order must cover every atom");
    }
    rank_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = start_order[i];
      if (a < 0 || static_cast<std::size_t>(a) >= n || rank_[static_cast<std::size_t>(a)] >= 0) {
        throw std::invalid_argument("write_smiles: start order is not a permutation");
      }
      rank_[static_cast<std::size_t>(a)] = static_cast<int>(i);
    }
    roots_.assign(start_order.begin(), start_order.end());
  }

  std::string run() {
    const auto n = static_cast<std::size_t>(m_.atom_count());
    visited_.assign(n, false);
    parent_bond_.assign(n, -1);
    children_.assign(n, {});
    ring_at_.assign(n, {});
    bond_seen_.assign(static_cast<std::size_t>(m_.bond_count()), false);

    std::vector<int> component_roots;
    for (const int a : roots_) {
      if (!visited_[static_cast<std::size_t>(a)]) {
        component_roots.push_back(a);
        build_tree(a);
      }
    }
    std::string out;
    for (std::size_t i = 0; i < component_roots.size(); ++i) {
      if (i > 0) {
        out += '.';
      }
      emit(component_roots[i], -1, out);
    }
    return out;
  }

 private:
  std::vector<Neighbor> ordered_neighbors(int a) const {
    std::vector<Neighbor> nbs(m_.neighbors(a).begin(), m_.neighbors(a).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& x, const Neighbor& y) {
      return rank_[static_cast<std::size_t>(x.atom)] < rank_[static_cast<std::size_t>(y.atom)];
    });
    return nbs;
  }

  void build_tree(int a) {
    visited_[static_cast<std::size_t>(a)] = true;
    for (const auto& nb : ordered_neighbors(a)) {
      const auto ub = static_cast<std::size_t>(nb.bond);
      if (nb.bond == parent_bond_[static_cast<std::size_t>(a)] || bond_seen_[ub]) {
        continue;
      }
      bond_seen_[ub] = true;
      if (!visited_[static_cast<std::size_t>(nb.atom)]) {
        parent_bond_[static_cast<std::size_t>(nb.atom)] = nb.bond;
        children_[static_cast<std::size_t>(a)].push_back(nb);
        build_tree(nb.atom);
      } else {
        // Back edge: the ancestor was written first and opens the ring.
        const int id = static_cast<int>(rings_.size());
        rings_.push_back(RingBond{nb.bond, nb.atom, a});
        ring_at_[static_cast<std::size_t>(nb.atom)].push_back(id);
        ring_at_[static_cast<std::size_t>(a)].push_back(id);
      }
    }
  }

  std::string bond_symbol(int bond, int from) const {
    const auto& b = m_.bond(bond);
    const bool both_aromatic = m_.atom(b.begin).aromatic && m_.atom(b.end).aromatic;
    switch (b.order) {
      case BondOrder::Double:
        return "=";
      case BondOrder::Triple:
        return "#";
      case BondOrder::Aromatic:
        return both_aromatic ? "" : ":";
      case BondOrder::Single:
        break;
    }
    switch (b.direction_from(from)) {
      case BondDirection::Up:
        return "/";
      case BondDirection::Down:
        return "\\";
      case BondDirection::None:
        break;
    }
    return both_aromatic ? "-" : "";
  }

  int allocate_digit() {
    int d = 1;
    while (std::find(open_digits_.begin(), open_digits_.end(), d) != open_digits_.end()) {
      ++d;
    }
    open_digits_.push_back(d);
    return d;
  }

  static std::string digit_text(int d) {
    return d < 10 ? std::string(1, static_cast<char>('0' + d)) : "%" + std::to_string(d);
  }

  std::string atom_text(int a, const std::vector<int>& emitted_neighbors) const {
    const auto& atom = m_.atom(a);
    const auto* center = m_.stereocenter_at(a);
    std::string sym(symbol(atom.element));
    if (atom.aromatic) {
      sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
    }
    const bool organic = atom.element != Element::H && atom.charge == 0 && center == nullptr &&
                         atom.hydrogens == default_hydrogens(m_, a);
    if (organic) {
      return sym;
    }
    std::string out = "[" + sym;
    if (center != nullptr) {
      std::array<int, 4> order{};
      std::copy(emitted_neighbors.begin(), emitted_neighbors.end(), order.begin());
      out += center->chirality_for(order) == Chirality::Clockwise ? "@@" : "@";
    }
    if (atom.hydrogens > 0) {
      out += 'H';
      if (atom.hydrogens > 1) {
        out += std::to_string(atom.hydrogens);
      }
    }
    if (atom.charge != 0) {
      out += atom.charge > 0 ? '+' : '-';
      if (std::abs(atom.charge) > 1) {
        out += std::to_string(std::abs(atom.charge));
      }
    }
    out += ']';
    return out;
  }

  void emit(int a, int parent, std::string& out) {
    const auto ua = static_cast<std::size_t>(a);
    std::vector<int> closings;
    std::vector<int> openings;
    for (const int id : ring_at_[ua]) {
      (rings_[static_cast<std::size_t>(id)].closer == a ? closings : openings).push_back(id);
    }
    const auto by_partner = [&](int x, int y) {
      const auto& rx = rings_[static_cast<std::size_t>(x)];
      const auto& ry = rings_[static_cast<std::size_t>(y)];
      const int px = rx.closer == a ? rx.opener : rx.closer;
      const int py = ry.closer == a ? ry.opener : ry.closer;
      return rank_[static_cast<std::size_t>(px)] < rank_[static_cast<std::size_t>(py)];
    };
    std::sort(closings.begin(), closings.end(), by_partner);
    std::sort(openings.begin(), openings.end(), by_partner);

    std::vector<int> emitted;
    if (parent >= 0) {
      emitted.push_back(parent);
    }
    if (const auto* center = m_.stereocenter_at(a)) {
      if (std::find(center->neighbors.begin(), center->neighbors.end(), kImplicitNeighbor) !=
          center->neighbors.end()) {
        emitted.push_back(kImplicitNeighbor);
      }
    }
    for (const int id : closings) {
      emitted.push_back(rings_[static_cast<std::size_t>(id)].opener);
    }
    for (const int id : openings) {
      emitted.push_back(rings_[static_cast<std::size_t>(id)].closer);
    }
    for (const auto& child : children_[ua]) {
      emitted.push_back(child.atom);
    }

    out += atom_text(a, emitted);
    for (const int id : closings) {
      out += digit_text(rings_[static_cast<std::size_t>(id)].digit);
    }
    for (const int id : openings) {
      auto& ring = rings_[static_cast<std::size_t>(id)];
      ring.digit = allocate_digit();
      out += bond_symbol(ring.bond, a);
      out += digit_text(ring.digit);
    }
    for (const int id : closings) {
      const int d = rings_[static_cast<std::size_t>(id)].digit;
      open_digits_.erase(std::find(open_digits_.begin(), open_digits_.end(), d));
    }
    const auto& kids = children_[ua];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last) {
        out += '(';
      }
      out += bond_symbol(kids[i].bond, a);
      emit(kids[i].atom, a, out);
      if (!last) {
        out += ')';
      }
    }
  }

  const Molecule& m_;
  std::vector<int> rank_;
  std::vector<int> roots_;
  std::vector<bool> visited_;
  std::vector<int> parent_bond_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<int>> ring_at_;
  std::vector<bool> bond_seen_;
  std::vector<RingBond> rings_;
  std::vector<int> open_digits_;
};

}  // namespace

std::string write_smiles(const Molecule& m, std::span<const int> start_order) {
  return Writer(m, start_order).run();
}

std::string write_smiles(const Molecule& m) {
  std::vector<int> order(static_cast<std::size_t>(m.atom_count()));
  std::iota(order.begin(), order.end(), 0);
  return write_smiles(m, order);
}

}  // namespace chemlab::mol
