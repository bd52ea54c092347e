// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemlab/transformer/model.hpp"

namespace chemlab::nn {

struct NamedTensor {
  std::string name;
  Mat<float> value;
};

/// Weights, optimizer moments and counters of one training state.
struct Checkpoint {
  ModelConfig model;
  std::vector<NamedTensor> weights;
  std::vector<NamedTensor> first_moment;
  std::vector<NamedTensor> second_moment;
  long step = 0;
  std::string rng_state;
  nlohmann::json meta = nlohmann::json::object();
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: 8-byte magic, u32 version, u64 manifest size, JSON manifest,
/// then every tensor as little-endian float32 in manifest order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Checkpoint holding the current weights of `model` (moments empty).
Checkpoint snapshot(const Model<float>& model);
/// Model rebuilt from a checkpoint's config and weights.
Model<float> restore_model(const Checkpoint& ckpt);

}  // namespace chemlab::nn
