// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/training/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chemlab::train {

std::string_view to_string(OptimizerKind k) noexcept {
  return k == OptimizerKind::AdamW ? "adamw" : "adam";
}

void OptimizerConfig::validate() const {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("optimizer config: " + m); };
  if (warmup_steps < 1) fail("warmup_steps must be >= 1");
  if (accumulation < 1) fail("accumulation must be >= 1");
  if (token_budget < 2) fail("token_budget too small");
  if (max_steps < 0) fail("max_steps must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) fail("betas must be in [0, 1)");
  if (!(eps > 0)) fail("eps must be positive");
  if (!(weight_decay >= 0)) fail("weight_decay must be >= 0");
  if (!(lr_scale > 0)) fail("lr_scale must be positive");
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = {{"kind", to_string(c.kind)},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"eps", c.eps},
       {"weight_decay", c.weight_decay},
       {"warmup_steps", c.warmup_steps},
       {"lr_scale", c.lr_scale},
       {"token_budget", c.token_budget},
       {"accumulation", c.accumulation},
       {"max_steps", c.max_steps},
       {"early_stop", c.early_stop}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  OptimizerConfig d;
  const auto kind = j.value("kind", std::string("adam"));
  if (kind == "adam") {
    c.kind = OptimizerKind::Adam;
  } else if (kind == "adamw") {
    c.kind = OptimizerKind::AdamW;
  } else {
    throw std::invalid_argument("optimizer config: unknown kind '" + kind + "'");
  }
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.eps = j.value("eps", d.eps);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
  c.lr_scale = j.value("lr_scale", d.lr_scale);
  c.token_budget = j.value("token_budget", d.token_budget);
  c.accumulation = j.value("accumulation", d.accumulation);
  c.max_steps = j.value("max_steps", d.max_steps);
  c.early_stop = j.value("early_stop", d.early_stop);
}

double noam_lr(long step, int d_model, long warmup) {
  if (step < 1) {
    throw std::invalid_argument("learning rate schedule starts at step 1");
  }
  const double s = static_cast<double>(step);
  return std::pow(static_cast<double>(d_model), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(static_cast<double>(warmup), -1.5));
}

template <class T>
Adam<T>::Adam(const OptimizerConfig& cfg, const std::vector<nn::Parameter<T>>& params) : cfg_(cfg) {
  for (const auto& p : params) {
    m_.push_back(nn::Mat<T>::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(nn::Mat<T>::Zero(p.value.rows(), p.value.cols()));
  }
}

template <class T>
void Adam<T>::step(std::vector<nn::Parameter<T>>& params, double lr) {
  for (const auto& p : params) {
    if (!p.grad.allFinite()) {
      throw NonFiniteGradient("non-finite gradient in " + p.name);
    }
  }
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const T step_size = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg_.eps);
  const T decay = static_cast<T>(1.0 - lr * cfg_.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    m = static_cast<T>(b1) * m + static_cast<T>(1.0 - b1) * p.grad;
    v = static_cast<T>(b2) * v + static_cast<T>(1.0 - b2) * p.grad.cwiseProduct(p.grad);
    if (cfg_.kind == OptimizerKind::AdamW) {
      p.value *= decay;
    }
    p.value.array() -= step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace chemlab::train
