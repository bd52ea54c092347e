// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemlab/molgraph/molecule.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::synth {

/// Drug-like molecules assembled from ring and substituent fragments. Used
/// as a stand-in corpus when no external SMILES file is configured.
struct GeneratorConfig {
  int count = 1000;
  int min_heavy = 4;
  int max_heavy = 20;
  /// Probability that an eligible tetrahedral carbon receives a configuration.
  double stereo_prob = 0.35;
  /// Probability that an eligible acyclic C=C receives cis/trans markers.
  double cis_trans_prob = 0.2;
  /// Probability of appending a small counter-ion fragment.
  double salt_prob = 0.05;
  std::uint64_t seed = 1;
};

/// One molecule per call to the underlying random stream.
mol::Molecule random_molecule(const GeneratorConfig& cfg, Rng& rng);

/// `cfg.count` SMILES strings, each written from a random atom order.
std::vector<std::string> generate_smiles(const GeneratorConfig& cfg);

}  // namespace chemlab::synth
