// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace chemlab {

/// Mixes a base seed with a stream id so independent consumers (weights,
/// iteration order, sampling, dropout) never share a random sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; all distributions are implemented here
/// so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal draw (Box-Muller, no cached spare).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  std::string state() const;
  void restore(std::string_view state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace chemlab
