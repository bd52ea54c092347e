// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::mol {

inline constexpr int kMinHeavyAtoms = 3;
inline constexpr int kMaxHeavyAtoms = 50;

/// Key used for the zero-atom scaffold of acyclic molecules.
inline constexpr std::string_view kEmptyScaffoldKey = "<empty>";

/// Connected component with the most heavy atoms; ties go to the component
/// whose canonical SMILES sorts first.
Molecule strip_fragments(const Molecule& m);

bool passes_corpus_filter(const Molecule& m);

/// Graph isomorphism respecting element, aromaticity, charge, hydrogens,
/// bond order, bond direction and tetrahedral configuration.
bool stereo_isomorphic(const Molecule& a, const Molecule& b);

/// Repeatedly deletes atoms with at most one neighbor. Acyclic input yields
/// the empty molecule.
Molecule murcko_scaffold(const Molecule& m);

/// Canonical SMILES of the scaffold, or kEmptyScaffoldKey.
std::string scaffold_key(const Molecule& m);

}  // namespace chemlab::mol
