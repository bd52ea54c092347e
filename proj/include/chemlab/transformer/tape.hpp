// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chemlab/util/rng.hpp"

namespace chemlab::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
struct Parameter {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
};

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Shape of a batch of token rows, padded to a common length.
struct AttentionShape {
  int batch = 0;
  int q_len = 0;
  int k_len = 0;
  int heads = 1;
};

/// Reverse-mode recorder. Values are row-major matrices; every op appends a
/// node with its output and, when recording, a closure that pushes the
/// output gradient into its inputs. Parameters are leaves whose gradients
/// accumulate into Parameter::grad.
template <class T>
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const noexcept { return record_; }

  Var param(Parameter<T>& p);
  Var constant(Mat<T> value);

  const Mat<T>& value(Var v) const { return *nodes_[static_cast<std::size_t>(v.id)].v; }
  Mat<T>& grad(Var v) { return *nodes_[static_cast<std::size_t>(v.id)].g; }

  /// Rows of `table` selected by `ids`, times `scale`, plus `offset` rows
  /// (ids.size() x cols) when non-empty.
  Var embed(Var table, const std::vector<int>& ids, T scale, const Mat<T>& offset);
  /// x * W + b with W stored (in x out) and b (1 x out).
  Var linear(Var x, Var w, Var b);
  Var add(Var a, Var b);
  Var relu(Var x);
  /// Inverted dropout; identity when p == 0 or rng is null.
  Var dropout(Var x, T p, Rng* rng);
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5));
  /// Multi-head scaled dot-product attention on already projected q, k, v
  /// ((batch*len) x d each). key_pad has batch*k_len entries, nonzero for
  /// keys that must be ignored. Dropout applies to the attention weights.
  Var attention(Var q, Var k, Var v, const AttentionShape& shape,
                const std::vector<std::uint8_t>& key_pad, bool causal, T p, Rng* rng);
  /// Mean negative log-likelihood over rows whose label is >= 0. Output 1x1.
  Var cross_entropy(Var logits, const std::vector<int>& labels);

  /// Seeds d(root)/d(root) = 1 and runs every closure in reverse order.
  void backward(Var root);

 private:
  struct Node {
    Mat<T> own_v;
    Mat<T> own_g;
    Mat<T>* v = nullptr;
    Mat<T>* g = nullptr;
    std::function<void()> back;
  };

  Var push(Mat<T> value);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }

  bool record_;
  std::deque<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

/// Draws keep decisions 16 bits at a time: keep when the draw >= p * 65536.
std::vector<std::uint8_t> dropout_mask(std::size_t n, double p, Rng& rng);

}  // namespace chemlab::nn
