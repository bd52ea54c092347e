// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::mol {

enum class GrammarErrorKind : std::uint8_t {
  Empty,
  UnknownSymbol,
  UnsupportedElement,
  UnbalancedBranch,
  UnclosedRing,
  DanglingBond,
  BadBracketAtom,
  BadRingBond,
  BadChirality,
};

std::string_view to_string(GrammarErrorKind kind) noexcept;

class GrammarError : public std::runtime_error {
 public:
  GrammarError(GrammarErrorKind kind, std::size_t offset, const std::string& what);

  GrammarErrorKind kind() const noexcept { return kind_; }
  /// Byte offset into the input where the problem was detected.
  std::size_t offset() const noexcept { return offset_; }

 private:
  GrammarErrorKind kind_;
  std::size_t offset_;
};

/// Parses a SMILES string. Ring bonds, branches, bracket atoms, charges,
/// aromatic atoms, tetrahedral "@"/"@@" and "/" "\" markers are supported.
/// Hydrogen counts of unbracketed atoms are filled from default valences;
/// valence itself is not checked here (see validate()).
Molecule parse_smiles(std::string_view smiles);

/// Writes `m` visiting atoms in depth-first order driven by `start_order`, a
/// permutation of the atom indices: each fragment starts at its earliest atom
/// in `start_order` and neighbors are explored in that order. Stereo markers
/// are recomputed for the emitted neighbor order.
std::string write_smiles(const Molecule& m, std::span<const int> start_order);

/// write_smiles with the identity order.
std::string write_smiles(const Molecule& m);

}  // namespace chemlab::mol
