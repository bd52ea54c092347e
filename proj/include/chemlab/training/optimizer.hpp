// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemlab/transformer/tape.hpp"

namespace chemlab::train {

enum class OptimizerKind : std::uint8_t { Adam, AdamW };

std::string_view to_string(OptimizerKind k) noexcept;

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  double weight_decay = 0.01;  // AdamW only
  long warmup_steps = 4000;
  double lr_scale = 1.0;       // multiplies the schedule
  long token_budget = 4096;    // padded source+target tokens per batch
  int accumulation = 2;        // batches per optimizer step
  long max_steps = 80000;
  double early_stop = 0.95;    // perfect accuracy; <= 0 disables

  void validate() const;
};

void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// d_model^-0.5 * min(step^-0.5, step * warmup^-1.5); step >= 1.
double noam_lr(long step, int d_model, long warmup);

/// Adam with bias correction; AdamW adds decoupled decay p *= (1 - lr*wd)
/// before the moment update is applied.
template <class T>
class Adam {
 public:
  Adam(const OptimizerConfig& cfg, const std::vector<nn::Parameter<T>>& params);

  /// Applies one update with the gradients currently stored in `params`.
  void step(std::vector<nn::Parameter<T>>& params, double lr);

  long steps() const noexcept { return t_; }
  std::vector<nn::Mat<T>>& first_moment() noexcept { return m_; }
  std::vector<nn::Mat<T>>& second_moment() noexcept { return v_; }
  void set_steps(long t) noexcept { t_ = t; }

 private:
  OptimizerConfig cfg_;
  std::vector<nn::Mat<T>> m_;
  std::vector<nn::Mat<T>> v_;
  long t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace chemlab::train
