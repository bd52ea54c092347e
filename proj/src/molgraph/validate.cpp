// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/molgraph/validate.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "chemlab/molgraph/smiles.hpp"

namespace chemlab::mol {

std::string_view to_string(InvalidReason r) noexcept {
  switch (r) {
    case InvalidReason::None:
      return "valid";
    case InvalidReason::Grammar:
      return "grammar";
    case InvalidReason::Valence:
      return "valence";
    case InvalidReason::Kekulization:
      return "kekulization";
  }
  return "unknown";
}

namespace {

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

bool participates_in_aromatic(const Molecule& m, int i) {
  return m.atom(i).aromatic || m.has_aromatic_bond(i);
}

// Which aromatic-system atoms must receive one double bond. nullopt when an
// atom cannot be satisfied either way.
std::optional<std::vector<bool>> pi_requirements(const Molecule& m, std::string* detail) {
  std::vector<bool> needs(static_cast<std::size_t>(m.atom_count()), false);
  for (int i = 0; i < m.atom_count(); ++i) {
    if (!participates_in_aromatic(m, i)) {
      continue;
    }
    const auto& a = m.atom(i);
    const auto allowed = allowed_valences(a.element, a.charge);
    const int total = m.bond_order_sum(i) + a.hydrogens;
    if (contains(allowed, total)) {
      continue;
    }
    if (contains(allowed, total + 1)) {
      needs[static_cast<std::size_t>(i)] = true;
      continue;
    }
    if (detail != nullptr) {
      *detail = "aromatic atom " + std::to_string(i) + " has impossible valence";
    }
    return std::nullopt;
  }
  return needs;
}

class Matcher {
 public:
  Matcher(const Molecule& m, std::vector<bool> needs)
      : m_(m), needs_(std::move(needs)), matched_(needs_.size(), false),
        doubled_(static_cast<std::size_t>(m.bond_count()), false) {}

  bool solve() {
    int best = -1;
    int best_options = 1 << 30;
    for (int i = 0; i < m_.atom_count(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!needs_[ui] || matched_[ui]) {
        continue;
      }
      const int options = static_cast<int>(candidates(i).size());
      if (options < best_options) {
        best = i;
        best_options = options;
      }
    }
    if (best < 0) {
      return true;
    }
    if (best_options == 0) {
      return false;
    }
    for (const auto& nb : candidates(best)) {
      set(best, nb, true);
      if (solve()) {
        return true;
      }
      set(best, nb, false);
    }
    return false;
  }

  std::vector<bool> doubled() const { return doubled_; }

 private:
  std::vector<Neighbor> candidates(int i) const {
    std::vector<Neighbor> out;
    for (const auto& nb : m_.neighbors(i)) {
      const auto un = static_cast<std::size_t>(nb.atom);
      if (m_.bond(nb.bond).order == BondOrder::Aromatic && needs_[un] && !matched_[un]) {
        out.push_back(nb);
      }
    }
    return out;
  }

  void set(int i, const Neighbor& nb, bool on) {
    matched_[static_cast<std::size_t>(i)] = on;
    matched_[static_cast<std::size_t>(nb.atom)] = on;
    doubled_[static_cast<std::size_t>(nb.bond)] = on;
  }

  const Molecule& m_;
  std::vector<bool> needs_;
  std::vector<bool> matched_;
  std::vector<bool> doubled_;
};

}  // namespace

std::optional<std::vector<bool>> kekulize(const Molecule& m) {
  auto needs = pi_requirements(m, nullptr);
  if (!needs) {
    return std::nullopt;
  }
  Matcher matcher(m, std::move(*needs));
  if (!matcher.solve()) {
    return std::nullopt;
  }
  return matcher.doubled();
}

ValidationResult validate_molecule(const Molecule& m) {
  for (int i = 0; i < m.atom_count(); ++i) {
    if (participates_in_aromatic(m, i)) {
      continue;
    }
    const auto& a = m.atom(i);
    const int total = m.bond_order_sum(i) + a.hydrogens;
    if (!contains(allowed_valences(a.element, a.charge), total)) {
      return {InvalidReason::Valence, std::string(symbol(a.element)) + " atom " +
                                          std::to_string(i) + " has valence " +
                                          std::to_string(total)};
    }
  }
  std::string detail;
  auto needs = pi_requirements(m, &detail);
  if (!needs) {
    return {InvalidReason::Valence, detail};
  }
  Matcher matcher(m, std::move(*needs));
  if (!matcher.solve()) {
    return {InvalidReason::Kekulization, "no alternating bond assignment for aromatic system"};
  }
  return {};
}

ValidationResult validate(std::string_view smiles) {
  try {
    return validate_molecule(parse_smiles(smiles));
  } catch (const GrammarError& e) {
    return {InvalidReason::Grammar, e.what()};
  } catch (const std::exception& e) {
    return {InvalidReason::Grammar, e.what()};
  }
}

std::optional<Molecule> parse_valid(std::string_view smiles) {
  try {
    auto m = parse_smiles(smiles);
    if (!validate_molecule(m)) {
      return std::nullopt;
    }
    return m;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace chemlab::mol
