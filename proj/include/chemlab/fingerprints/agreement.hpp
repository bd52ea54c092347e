// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chemlab/fingerprints/fingerprint.hpp"
#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::fp {

/// Per-bit outcome counts over (prediction, target) pairs.
///   target bit 0: A invalid prediction, B predicted 0, C predicted 1
///   target bit 1: D invalid prediction, E predicted 0, F predicted 1
struct BitCounts {
  long a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  long zero_total() const noexcept { return a + b + c; }
  long one_total() const noexcept { return d + e + f; }
  std::optional<double> ratio0() const;
  std::optional<double> ratio1() const;
};

struct DimensionAgreementTable {
  FingerprintConfig config;
  std::vector<BitCounts> bits;
  long molecules = 0;

  void write_csv(std::ostream& out) const;
};

/// Invalid predictions count toward the denominators (buckets A and D).
DimensionAgreementTable dimension_agreement(
    const std::vector<std::pair<std::string, mol::Molecule>>& pairs, const FingerprintConfig& cfg);

}  // namespace chemlab::fp
