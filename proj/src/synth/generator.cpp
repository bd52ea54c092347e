// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/synth/generator.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"

namespace chemlab::synth {

namespace {

using mol::Atom;
using mol::BondDirection;
using mol::BondOrder;
using mol::Molecule;

constexpr std::array<std::string_view, 20> kRings = {
    "c1ccccc1",      "c1ccccc1",      "c1ccncc1",       "c1ccoc1",     "c1ccsc1",
    "c1cc[nH]c1",    "C1CCCCC1",      "C1CCNCC1",       "C1CCOCC1",    "C1CC1",
    "C1CCCC1",       "c1cnc[nH]1",    "c1ccc2ccccc2c1", "C1CNCCN1",    "O=C1CCCN1",
    "c1ncncc1",      "C1COCCN1",      "c1ccc2[nH]ccc2c1", "C1CCC1",    "c1cscn1",
};

constexpr std::array<std::string_view, 28> kGroups = {
    "C",     "C",      "CC",        "CCC",      "C(C)C",  "O",    "N",
    "F",     "Cl",     "Br",        "C(=O)O",   "C(=O)N", "C#N",  "OC",
    "C(F)(F)F", "S(=O)(=O)N", "C=O", "NC(=O)C", "C=CC",   "CCO",  "CN",
    "I",     "C(C)O",  "C(N)C(=O)O", "C(O)CC",  "C(C)N",  "C=CC(=O)O", "OCC",
};

constexpr std::array<std::string_view, 3> kSalts = {"Cl", "O", "Br"};

Molecule parse_fragment(std::string_view s) { return mol::parse_smiles(s); }

// Appends `frag` to `m`, returning the index offset of the copied atoms.
int merge(Molecule& m, const Molecule& frag) {
  const int offset = m.atom_count();
  for (const auto& a : frag.atoms()) {
    m.add_atom(a);
  }
  for (const auto& b : frag.bonds()) {
    m.add_bond(b.begin + offset, b.end + offset, b.order, b.direction);
  }
  return offset;
}

std::vector<int> substitutable(const Molecule& m) {
  std::vector<int> out;
  for (int i = 0; i < m.atom_count(); ++i) {
    const auto& a = m.atom(i);
    if (a.hydrogens > 0 && a.charge == 0 && a.element != mol::Element::H) {
      out.push_back(i);
    }
  }
  return out;
}

int pick(Rng& rng, const std::vector<int>& v) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

void attach(Molecule& m, const Molecule& frag, Rng& rng) {
  if (m.empty()) {
    merge(m, frag);
    return;
  }
  const auto sites = substitutable(m);
  const auto frag_sites = substitutable(frag);
  if (sites.empty() || frag_sites.empty()) {
    return;
  }
  const int a = pick(rng, sites);
  const int b = pick(rng, frag_sites) + merge(m, frag);
  m.add_bond(a, b, BondOrder::Single);
  --m.atom(a).hydrogens;
  --m.atom(b).hydrogens;
}

bool all_single(const Molecule& m, int i) {
  const auto nbs = m.neighbors(i);
  return std::all_of(nbs.begin(), nbs.end(),
                     [&](const mol::Neighbor& nb) { return m.bond(nb.bond).order == BondOrder::Single; });
}

void assign_tetrahedral(Molecule& m, double prob, Rng& rng) {
  const auto classes = mol::refined_classes(m);
  const int n = m.atom_count();
  for (int i = 0; i < n; ++i) {
    const auto& a = m.atom(i);
    const int deg = m.degree(i);
    if (a.element != mol::Element::C || a.aromatic || a.charge != 0 || !all_single(m, i)) {
      continue;
    }
    if (!((deg == 4 && a.hydrogens == 0) || (deg == 3 && a.hydrogens == 1))) {
      continue;
    }
    std::vector<int> seen;
    bool distinct = true;
    for (const auto& nb : m.neighbors(i)) {
      const int c = classes[static_cast<std::size_t>(nb.atom)];
      if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
        distinct = false;
      }
      seen.push_back(c);
    }
    if (!distinct || !rng.bernoulli(prob)) {
      continue;
    }
    mol::TetrahedralCenter center;
    center.atom = i;
    std::size_t k = 0;
    for (const auto& nb : m.neighbors(i)) {
      center.neighbors[k++] = nb.atom;
    }
    if (deg == 3) {
      center.neighbors[3] = mol::kImplicitNeighbor;
    }
    center.chirality = rng.bernoulli(0.5) ? mol::Chirality::Clockwise : mol::Chirality::CounterClockwise;
    m.add_stereocenter(center);
  }
}

void assign_cis_trans(Molecule& m, double prob, Rng& rng) {
  const auto in_ring = mol::ring_bonds(m);
  for (int bi = 0; bi < m.bond_count(); ++bi) {
    const auto b = m.bond(bi);
    if (b.order != BondOrder::Double || in_ring[static_cast<std::size_t>(bi)]) {
      continue;
    }
    if (m.atom(b.begin).element != mol::Element::C || m.atom(b.end).element != mol::Element::C) {
      continue;
    }
    std::array<int, 2> side{-1, -1};
    bool ok = true;
    for (int s = 0; s < 2; ++s) {
      const int atom = s == 0 ? b.begin : b.end;
      if (m.degree(atom) != 2 || m.atom(atom).hydrogens != 1) {
        ok = false;
        break;
      }
      for (const auto& nb : m.neighbors(atom)) {
        if (nb.bond != bi) {
          side[static_cast<std::size_t>(s)] = nb.bond;
        }
      }
      const auto& sb = m.bond(side[static_cast<std::size_t>(s)]);
      if (sb.order != BondOrder::Single || sb.direction != BondDirection::None) {
        ok = false;
        break;
      }
    }
    if (!ok || !rng.bernoulli(prob)) {
      continue;
    }
    for (const int sb : side) {
      m.bond(sb).direction = rng.bernoulli(0.5) ? BondDirection::Up : BondDirection::Down;
    }
  }
}

}  // namespace

Molecule random_molecule(const GeneratorConfig& cfg, Rng& rng) {
  const int span = std::max(1, cfg.max_heavy - cfg.min_heavy + 1);
  const int target = cfg.min_heavy + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
  Molecule m;
  for (int attempt = 0; attempt < 64 && m.heavy_atom_count() < target; ++attempt) {
    const bool ring = m.empty() ? rng.bernoulli(0.85) : rng.bernoulli(0.3);
    const auto smiles = ring ? kRings[rng.below(kRings.size())] : kGroups[rng.below(kGroups.size())];
    const Molecule frag = parse_fragment(smiles);
    if (m.heavy_atom_count() + frag.heavy_atom_count() > cfg.max_heavy) {
      continue;
    }
    attach(m, frag, rng);
  }
  assign_tetrahedral(m, cfg.stereo_prob, rng);
  assign_cis_trans(m, cfg.cis_trans_prob, rng);
  if (rng.bernoulli(cfg.salt_prob)) {
    merge(m, parse_fragment(kSalts[rng.below(kSalts.size())]));
  }
  return m;
}

std::vector<std::string> generate_smiles(const GeneratorConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0x5e17));
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(std::max(0, cfg.count)));
  for (int i = 0; i < cfg.count; ++i) {
    const Molecule m = random_molecule(cfg, rng);
    out.push_back(mol::randomized_smiles(m, rng.next_u64()));
  }
  return out;
}

}  // namespace chemlab::synth
