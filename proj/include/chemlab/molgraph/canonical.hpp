// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::mol {

/// Isomorphism-invariant atom classes: (element, aromaticity, charge, H count,
/// degree, stereo flag, ring flag) refined over neighborhoods to a fixpoint.
/// Equal values mean the refinement could not tell the atoms apart.
std::vector<int> refined_classes(const Molecule& m);

/// Canonical SMILES. The string depends only on the molecule (with stereo),
/// never on its atom numbering: fragments are canonicalized separately and
/// joined in sorted order; within a fragment, the lexicographically smallest
/// string over every tie-breaking of the refined classes is returned.
/// The empty molecule yields "".
std::string canonical_smiles(const Molecule& m);

/// SMILES written from a uniformly random atom permutation.
std::string randomized_smiles(const Molecule& m, std::uint64_t seed);

}  // namespace chemlab::mol
