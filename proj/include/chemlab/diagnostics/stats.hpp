// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>

namespace chemlab::diag {

class DegenerateSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WelchResult {
  double t = 0;
  double dof = 0;
  double p = 1;  // two-sided
};

/// Welch's unequal-variance t-test with Satterthwaite degrees of freedom.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// min(1, p * comparisons).
double bonferroni(double p, int comparisons);

double mean(std::span<const double> x);
/// Unbiased (n - 1) standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> x);

}  // namespace chemlab::diag
