// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::mol {

enum class InvalidReason : std::uint8_t { None, Grammar, Valence, Kekulization };

std::string_view to_string(InvalidReason r) noexcept;

struct ValidationResult {
  InvalidReason reason = InvalidReason::None;
  std::string detail;

  bool valid() const noexcept { return reason == InvalidReason::None; }
  explicit operator bool() const noexcept { return valid(); }
};

/// Checks grammar, per-atom valence (bond orders + hydrogens within the
/// charge-adjusted allowed set) and that every aromatic system admits an
/// alternating single/double assignment. Never throws.
ValidationResult validate(std::string_view smiles);

/// Valence and kekulization checks on an already parsed molecule.
ValidationResult validate_molecule(const Molecule& m);

/// Double-bond assignment for the aromatic bonds of `m`: for every bond,
/// true when the Kekulé structure makes it double. nullopt when no
/// assignment exists.
std::optional<std::vector<bool>> kekulize(const Molecule& m);

/// Parses and validates in one step; nullopt for anything invalid.
std::optional<Molecule> parse_valid(std::string_view smiles);

}  // namespace chemlab::mol
