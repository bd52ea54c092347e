// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/transformer/pooling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chemlab::nn {

std::string_view to_string(Pooling p) noexcept {
  switch (p) {
    case Pooling::Mean:
      return "mean";
    case Pooling::First:
      return "first";
    case Pooling::Cat4:
      return "cat4";
    case Pooling::Cat6:
      return "cat6";
  }
  return "mean";
}

std::optional<Pooling> pooling_from_string(std::string_view s) noexcept {
  for (const auto p : {Pooling::Mean, Pooling::First, Pooling::Cat4, Pooling::Cat6}) {
    if (to_string(p) == s) {
      return p;
    }
  }
  return std::nullopt;
}

int pooling_factor(Pooling p) noexcept {
  switch (p) {
    case Pooling::Mean:
    case Pooling::First:
      return 1;
    case Pooling::Cat4:
      return 4;
    case Pooling::Cat6:
      return 6;
  }
  return 1;
}

template <class T>
Mat<T> pool_memory(const Mat<T>& memory, const TokenBatch& src, int pad_id, Pooling method) {
  const Eigen::Index d = memory.cols();
  if (memory.rows() != static_cast<Eigen::Index>(src.rows) * src.len) {
    throw std::invalid_argument("pool_memory: memory rows do not match the batch");
  }
  Mat<T> out(src.rows, d * pooling_factor(method));
  for (int r = 0; r < src.rows; ++r) {
    int count = 0;
    int last = -1;
    for (int t = 0; t < src.len; ++t) {
      if (src.at(r, t) != pad_id) {
        ++count;
        last = t;
      }
    }
    if (count == 0) {
      throw std::invalid_argument("pool_memory: empty memory row");
    }
    Eigen::Matrix<T, 1, Eigen::Dynamic> sum = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(d);
    Eigen::Matrix<T, 1, Eigen::Dynamic> mx = Eigen::Matrix<T, 1, Eigen::Dynamic>::Constant(
        d, -std::numeric_limits<T>::infinity());
    Eigen::Matrix<T, 1, Eigen::Dynamic> mn = -mx;
    for (int t = 0; t < src.len; ++t) {
      if (src.at(r, t) == pad_id) {
        continue;
      }
      const auto row = memory.row(static_cast<Eigen::Index>(r) * src.len + t);
      sum += row;
      mx = mx.cwiseMax(row);
      mn = mn.cwiseMin(row);
    }
    const Eigen::Matrix<T, 1, Eigen::Dynamic> mean = sum / static_cast<T>(count);
    Eigen::Matrix<T, 1, Eigen::Dynamic> var = Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(d);
    for (int t = 0; t < src.len; ++t) {
      if (src.at(r, t) != pad_id) {
        var.array() += (memory.row(static_cast<Eigen::Index>(r) * src.len + t) - mean).array().square();
      }
    }
    const Eigen::Matrix<T, 1, Eigen::Dynamic> sd = (var / static_cast<T>(count)).cwiseSqrt();
    const auto first = memory.row(static_cast<Eigen::Index>(r) * src.len);
    const auto lastrow = memory.row(static_cast<Eigen::Index>(r) * src.len + last);
    auto put = [&](int slot, const auto& v) { out.block(r, slot * d, 1, d) = v; };
    switch (method) {
      case Pooling::Mean:
        put(0, mean);
        break;
      case Pooling::First:
        put(0, first);
        break;
      case Pooling::Cat4:
        put(0, mean);
        put(1, mx);
        put(2, first);
        put(3, lastrow);
        break;
      case Pooling::Cat6:
        put(0, mean);
        put(1, mx);
        put(2, mn);
        put(3, sd);
        put(4, first);
        put(5, lastrow);
        break;
    }
  }
  return out;
}

template Mat<float> pool_memory<float>(const Mat<float>&, const TokenBatch&, int, Pooling);
template Mat<double> pool_memory<double>(const Mat<double>&, const TokenBatch&, int, Pooling);

}  // namespace chemlab::nn
