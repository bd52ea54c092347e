// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "chemlab/transformer/model.hpp"

namespace chemlab::nn {

enum class Pooling : std::uint8_t { Mean, First, Cat4, Cat6 };

std::string_view to_string(Pooling p) noexcept;
std::optional<Pooling> pooling_from_string(std::string_view s) noexcept;

/// Output width multiplier: 1, 1, 4, 6.
int pooling_factor(Pooling p) noexcept;

/// Fixed-width descriptors from encoder memory, one row per batch entry.
/// Statistics skip PAD positions. "last" is the final non-PAD position;
/// std is the population standard deviation.
///   mean  -> mean
///   first -> position 0
///   cat4  -> (mean, max, first, last)
///   cat6  -> (mean, max, min, std, first, last)
template <class T>
Mat<T> pool_memory(const Mat<T>& memory, const TokenBatch& src, int pad_id, Pooling method);

}  // namespace chemlab::nn
