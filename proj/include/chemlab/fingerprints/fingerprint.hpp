// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::fp {

enum class FingerprintKind : std::uint8_t { Ecfp, PathKeys };

struct FingerprintConfig {
  FingerprintKind kind = FingerprintKind::Ecfp;
  int radius = 2;      // ECFP only, 0..3
  int max_path = 7;    // path keys only, atoms per path
  int width = 2048;    // power of two

  void validate() const;
  std::string name() const;  // e.g. "ecfp2", "path7"
  friend bool operator==(const FingerprintConfig&, const FingerprintConfig&) = default;
};

class ConfigMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Fingerprint {
 public:
  explicit Fingerprint(const FingerprintConfig& cfg);

  const FingerprintConfig& config() const noexcept { return cfg_; }
  int width() const noexcept { return cfg_.width; }
  bool test(int bit) const;
  void set(int bit);
  int count() const noexcept;
  std::vector<int> on_bits() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Lowercase hex, bit 0 in the least significant nibble of the first byte.
  std::string hex() const;

  friend bool operator==(const Fingerprint& a, const Fingerprint& b) {
    return a.cfg_ == b.cfg_ && a.words_ == b.words_;
  }

 private:
  FingerprintConfig cfg_;
  std::vector<std::uint64_t> words_;
};

/// 64-bit FNV-1a over the little-endian bytes of each value.
std::uint64_t fnv1a(std::span<const std::int64_t> values) noexcept;

/// Circular fingerprint. Identifiers from every radius 0..R are folded into
/// the bit vector; from radius 2 on, a stereocenter's identifier also encodes
/// its configuration relative to the neighbor identifiers.
Fingerprint ecfp(const mol::Molecule& m, const FingerprintConfig& cfg);

/// Hashed simple paths of 1..max_path atoms, each in its smaller orientation.
Fingerprint path_keys(const mol::Molecule& m, const FingerprintConfig& cfg);

/// Dispatches on cfg.kind.
Fingerprint fingerprint(const mol::Molecule& m, const FingerprintConfig& cfg);

/// |a & b| / |a | b|; 1.0 when both are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace chemlab::fp
