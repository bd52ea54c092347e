// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/fingerprints/agreement.hpp"

#include <iomanip>

#include "chemlab/molgraph/validate.hpp"

namespace chemlab::fp {

std::optional<double> BitCounts::ratio0() const {
  if (zero_total() == 0) {
    return std::nullopt;
  }
  return static_cast<double>(b) / static_cast<double>(zero_total());
}

std::optional<double> BitCounts::ratio1() const {
  if (one_total() == 0) {
    return std::nullopt;
  }
  return static_cast<double>(f) / static_cast<double>(one_total());
}

DimensionAgreementTable dimension_agreement(
    const std::vector<std::pair<std::string, mol::Molecule>>& pairs, const FingerprintConfig& cfg) {
  DimensionAgreementTable table{cfg, std::vector<BitCounts>(static_cast<std::size_t>(cfg.width)), 0};
  for (const auto& [prediction, target] : pairs) {
    const Fingerprint tf = fingerprint(target, cfg);
    const auto parsed = mol::parse_valid(prediction);
    std::optional<Fingerprint> pf;
    if (parsed) {
      pf = fingerprint(*parsed, cfg);
    }
    for (int i = 0; i < cfg.width; ++i) {
      auto& c = table.bits[static_cast<std::size_t>(i)];
      if (!tf.test(i)) {
        ++(!pf ? c.a : pf->test(i) ? c.c : c.b);
      } else {
        ++(!pf ? c.d : pf->test(i) ? c.f : c.e);
      }
    }
    ++table.molecules;
  }
  return table;
}

void DimensionAgreementTable::write_csv(std::ostream& out) const {
  const auto opt = [&](const std::optional<double>& v) {
    if (v) {
      out << std::setprecision(10) << *v;
    }
  };
  out << "bit,A,B,C,D,E,F,ratio0,ratio1,target_frequency\n";
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto& c = bits[i];
    out << i << ',' << c.a << ',' << c.b << ',' << c.c << ',' << c.d << ',' << c.e << ',' << c.f
        << ',';
    opt(c.ratio0());
    out << ',';
    opt(c.ratio1());
    out << ',';
    opt(molecules > 0 ? std::optional<double>(static_cast<double>(c.one_total()) /
                                              static_cast<double>(molecules))
                      : std::nullopt);
    out << '\n';
  }
}

}  // namespace chemlab::fp
