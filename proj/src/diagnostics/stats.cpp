// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/diagnostics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace chemlab::diag {

double mean(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) {
    return 0.0;
  }
  const double m = mean(x);
  double ss = 0;
  for (const double v : x) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateSample("Welch test needs at least two values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(sample_sd(a), 2) / na;
  const double vb = std::pow(sample_sd(b), 2) / nb;
  if (va + vb == 0.0) {
    throw DegenerateSample("Welch test needs nonzero variance in at least one sample");
  }
  WelchResult r;
  r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.dof = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  const boost::math::students_t dist(r.dof);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

double bonferroni(double p, int comparisons) {
  return std::min(1.0, p * static_cast<double>(comparisons));
}

}  // namespace chemlab::diag
