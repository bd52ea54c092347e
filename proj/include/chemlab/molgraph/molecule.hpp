// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace chemlab::mol {

enum class Element : std::uint8_t { H, B, C, N, O, F, P, S, Cl, Br, I };

std::string_view symbol(Element e) noexcept;
std::optional<Element> element_from_symbol(std::string_view s) noexcept;

/// Elements that may be written in lowercase (aromatic) form.
bool supports_aromatic(Element e) noexcept;

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

/// Directional marker of a single bond, relative to the bond's stored
/// begin -> end orientation: Up is "begin/end", Down is "begin\end".
enum class BondDirection : std::uint8_t { None, Up, Down };

BondDirection flipped(BondDirection d) noexcept;

/// "@" is counterclockwise, "@@" is clockwise, both looking from the first
/// listed neighbor toward the center.
enum class Chirality : std::uint8_t { CounterClockwise, Clockwise };

Chirality inverted(Chirality c) noexcept;

/// Placeholder for the implicit hydrogen (or lone pair) of a stereocenter.
inline constexpr int kImplicitNeighbor = -1;

struct Atom {
  Element element = Element::C;
  bool aromatic = false;
  int charge = 0;
  int hydrogens = 0;  // attached hydrogens not present as separate atoms

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::Single;
  BondDirection direction = BondDirection::None;

  int other(int atom) const noexcept { return atom == begin ? end : begin; }
  /// Direction as seen when walking from `from` to the other endpoint.
  BondDirection direction_from(int from) const noexcept {
    return from == begin ? direction : flipped(direction);
  }
};

struct TetrahedralCenter {
  int atom = 0;
  std::array<int, 4> neighbors{};  // atom indices or kImplicitNeighbor
  Chirality chirality = Chirality::CounterClockwise;

  /// Chirality label that denotes the same configuration when the neighbors
  /// are listed in `order` instead. `order` must be a permutation of
  /// `neighbors`.
  Chirality chirality_for(const std::array<int, 4>& order) const;
};

/// Sign of the permutation taking `from` to `to` (both hold the same four
/// distinct values): true when odd.
bool is_odd_permutation(const std::array<int, 4>& from, const std::array<int, 4>& to);

struct Neighbor {
  int atom;
  int bond;
};

/// Attributed molecular graph with tetrahedral stereo. Atoms and bonds are
/// append-only; callers treat a finished Molecule as a value.
class Molecule {
 public:
  int add_atom(const Atom& atom);
  /// Throws std::invalid_argument on self-loops, duplicates or bad indices.
  int add_bond(int a, int b, BondOrder order,
               BondDirection direction = BondDirection::None);
  /// Throws std::invalid_argument unless the center references the atom's
  /// actual neighbors (plus at most one implicit placeholder).
  void add_stereocenter(const TetrahedralCenter& center);

  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::span<const Bond> bonds() const noexcept { return bonds_; }
  std::span<const TetrahedralCenter> stereocenters() const noexcept { return centers_; }
  std::span<const Neighbor> neighbors(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }

  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int bond_count() const noexcept { return static_cast<int>(bonds_.size()); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  int heavy_atom_count() const noexcept;
  bool empty() const noexcept { return atoms_.empty(); }

  std::optional<int> find_bond(int a, int b) const;
  const TetrahedralCenter* stereocenter_at(int atom) const;
  void clear_stereocenter(int atom);

  /// Sum of bond orders with aromatic bonds counted as 1.
  int bond_order_sum(int i) const;
  bool has_aromatic_bond(int i) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<TetrahedralCenter> centers_;
  std::vector<int> center_of_atom_;
};

/// Connected components as sorted atom index lists, ordered by lowest atom.
std::vector<std::vector<int>> connected_components(const Molecule& m);

/// Induced subgraph on `atoms` (in the given order), stereo remapped. Centers
/// that lose a neighbor are dropped.
Molecule extract_atoms(const Molecule& m, std::span<const int> atoms);

/// Per-bond ring membership (a bond is in a ring iff it is not a bridge).
std::vector<bool> ring_bonds(const Molecule& m);
std::vector<bool> ring_atoms(const Molecule& m);

/// Hydrogen count an unbracketed (organic subset) atom would receive given
/// its bonds in `m`. Only meaningful for uncharged organic-subset elements.
int default_hydrogens(const Molecule& m, int atom);

/// Allowed total valences for an element at a formal charge.
std::vector<int> allowed_valences(Element e, int charge);

}  // namespace chemlab::mol
