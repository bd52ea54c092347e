// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace chemlab {

/// Keeps freed activation buffers in the heap instead of returning them to
/// the OS, so each training step reuses already faulted-in pages.
void tune_allocator() noexcept;

}  // namespace chemlab
