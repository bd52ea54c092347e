// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "chemlab/training/optimizer.hpp"

using namespace chemlab;
using namespace chemlab::train;

namespace {

std::vector<nn::Parameter<double>> scalar(double value, double grad) {
  std::vector<nn::Parameter<double>> p(1);
  p[0].name = "x";
  p[0].value = nn::Mat<double>::Constant(1, 1, value);
  p[0].grad = nn::Mat<double>::Constant(1, 1, grad);
  return p;
}

}  // namespace

TEST_CASE("warmup schedule") {
  CHECK(noam_lr(4000, 512, 4000) == doctest::Approx(6.987712429686844e-4).epsilon(1e-12));
  CHECK(noam_lr(1, 512, 4000) == doctest::Approx(std::pow(512.0, -0.5) * std::pow(4000.0, -1.5)));
  CHECK_THROWS_AS(noam_lr(0, 512, 4000), std::invalid_argument);
  long best = 0;
  double peak = 0.0;
  for (long s = 1; s <= 20000; ++s) {
    const double lr = noam_lr(s, 128, 1500);
    if (lr > peak) {
      peak = lr;
      best = s;
    }
  }
  CHECK(best == 1500);
  CHECK(noam_lr(1499, 128, 1500) < noam_lr(1500, 128, 1500));
  CHECK(noam_lr(1501, 128, 1500) < noam_lr(1500, 128, 1500));
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  CHECK_NOTHROW(c.validate());
  c.warmup_steps = 0;
  CHECK_THROWS(c.validate());
  c = OptimizerConfig{};
  c.accumulation = 0;
  CHECK_THROWS(c.validate());
  c = OptimizerConfig{};
  nlohmann::json j = c;
  const auto back = j.get<OptimizerConfig>();
  CHECK(back.warmup_steps == c.warmup_steps);
  CHECK(back.kind == c.kind);
}

TEST_CASE("first Adam step moves by the learning rate") {
  OptimizerConfig c;
  for (const double g : {0.3, -2.0, 1e-3}) {
    auto p = scalar(1.0, g);
    Adam<double> adam(c, p);
    adam.step(p, 1e-2);
    const double delta = p[0].value(0, 0) - 1.0;
    CHECK(std::abs(delta) == doctest::Approx(1e-2).epsilon(1e-5));
    CHECK((delta < 0) == (g > 0));
  }
}

TEST_CASE("constant gradient keeps the bias-corrected step at lr") {
  OptimizerConfig c;
  auto p = scalar(0.0, 0.5);
  Adam<double> adam(c, p);
  for (int i = 0; i < 10; ++i) {
    adam.step(p, 1e-3);
  }
  CHECK(p[0].value(0, 0) == doctest::Approx(-1e-2).epsilon(1e-6));
  CHECK(adam.steps() == 10);
}

TEST_CASE("AdamW without decay equals Adam exactly") {
  OptimizerConfig a;
  OptimizerConfig w = a;
  w.kind = OptimizerKind::AdamW;
  w.weight_decay = 0.0;
  auto pa = scalar(0.7, 0.0);
  auto pw = scalar(0.7, 0.0);
  Adam<double> adam(a, pa);
  Adam<double> adamw(w, pw);
  for (int i = 0; i < 25; ++i) {
    const double g = std::sin(0.3 * i) + 0.1;
    pa[0].grad(0, 0) = g;
    pw[0].grad(0, 0) = g;
    adam.step(pa, 1e-3 * (i + 1));
    adamw.step(pw, 1e-3 * (i + 1));
    CHECK(pa[0].value(0, 0) == pw[0].value(0, 0));
  }
}

TEST_CASE("decoupled decay with zero gradient") {
  OptimizerConfig c;
  c.kind = OptimizerKind::AdamW;
  c.weight_decay = 0.1;
  auto p = scalar(2.0, 0.0);
  Adam<double> adamw(c, p);
  adamw.step(p, 0.01);
  CHECK(p[0].value(0, 0) == doctest::Approx(2.0 * (1.0 - 0.01 * 0.1)).epsilon(1e-15));
  c.kind = OptimizerKind::Adam;
  auto q = scalar(2.0, 0.0);
  Adam<double> adam(c, q);
  adam.step(q, 0.01);
  CHECK(q[0].value(0, 0) == 2.0);
}

TEST_CASE("non-finite gradients are rejected before any update") {
  OptimizerConfig c;
  auto p = scalar(1.0, std::numeric_limits<double>::quiet_NaN());
  Adam<double> adam(c, p);
  CHECK_THROWS_AS(adam.step(p, 1e-3), NonFiniteGradient);
  CHECK(p[0].value(0, 0) == 1.0);
  CHECK(adam.steps() == 0);
  p[0].grad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam.step(p, 1e-3), NonFiniteGradient);
}
