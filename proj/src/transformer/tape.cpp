// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/transformer/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chemlab::nn {

std::vector<std::uint8_t> dropout_mask(std::size_t n, double p, Rng& rng) {
  std::vector<std::uint8_t> keep(n);
  const auto threshold = static_cast<std::uint64_t>(std::llround(p * 65536.0));
  std::size_t i = 0;
  while (i < n) {
    std::uint64_t r = rng.next_u64();
    for (int k = 0; k < 4 && i < n; ++k, ++i) {
      keep[i] = (r & 0xffff) >= threshold ? 1 : 0;
      r >>= 16;
    }
  }
  return keep;
}

template <class T>
Var Tape<T>::push(Mat<T> value) {
  Node n;
  n.own_v = std::move(value);
  nodes_.push_back(std::move(n));
  Node& back = nodes_.back();
  back.v = &back.own_v;
  if (record_) {
    back.own_g = Mat<T>::Zero(back.own_v.rows(), back.own_v.cols());
  }
  back.g = &back.own_g;
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <class T>
Var Tape<T>::param(Parameter<T>& p) {
  Node n;
  n.v = &p.value;
  if (record_ && (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols())) {
    p.grad = Mat<T>::Zero(p.value.rows(), p.value.cols());
  }
  n.g = &p.grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <class T>
Var Tape<T>::constant(Mat<T> value) {
  return push(std::move(value));
}

template <class T>
Var Tape<T>::embed(Var table, const std::vector<int>& ids, T scale, const Mat<T>& offset) {
  const auto& tv = value(table);
  Mat<T> out(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.row(r) = tv.row(ids[i]) * scale;
  }
  if (offset.size() > 0) {
    out += offset;
  }
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, table, ids, scale] {
      const auto& gy = grad(y);
      auto& gt = grad(table);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        gt.row(ids[i]) += gy.row(static_cast<Eigen::Index>(i)) * scale;
      }
    };
  }
  return y;
}

template <class T>
Var Tape<T>::linear(Var x, Var w, Var b) {
  Mat<T> out = value(x) * value(w);
  out.rowwise() += value(b).row(0);
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, x, w, b] {
      const auto& gy = grad(y);
      grad(x).noalias() += gy * value(w).transpose();
      grad(w).noalias() += value(x).transpose() * gy;
      grad(b).row(0) += gy.colwise().sum();
    };
  }
  return y;
}

template <class T>
Var Tape<T>::add(Var a, Var b) {
  const Var y = push(value(a) + value(b));
  if (record_) {
    node(y).back = [this, y, a, b] {
      grad(a) += grad(y);
      grad(b) += grad(y);
    };
  }
  return y;
}

template <class T>
Var Tape<T>::relu(Var x) {
  const Var y = push(value(x).cwiseMax(T(0)));
  if (record_) {
    node(y).back = [this, y, x] {
      grad(x).array() += (value(x).array() > T(0)).select(grad(y).array(), T(0));
    };
  }
  return y;
}

template <class T>
Var Tape<T>::dropout(Var x, T p, Rng* rng) {
  if (p <= T(0) || rng == nullptr) {
    return x;
  }
  const auto& xv = value(x);
  auto keep = dropout_mask(static_cast<std::size_t>(xv.size()), static_cast<double>(p), *rng);
  const T scale = T(1) / (T(1) - p);
  Mat<T> out(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.size(); ++i) {
    out.data()[i] = keep[static_cast<std::size_t>(i)] ? xv.data()[i] * scale : T(0);
  }
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, x, keep = std::move(keep), scale] {
      auto& gx = grad(x);
      const auto& gy = grad(y);
      for (Eigen::Index i = 0; i < gy.size(); ++i) {
        if (keep[static_cast<std::size_t>(i)]) {
          gx.data()[i] += gy.data()[i] * scale;
        }
      }
    };
  }
  return y;
}

template <class T>
Var Tape<T>::layer_norm(Var x, Var gamma, Var beta, T eps) {
  const auto& xv = value(x);
  const Eigen::Index n = xv.rows();
  const Eigen::Index d = xv.cols();
  Mat<T> xhat(n, d);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = xv.row(r).mean();
    const auto centered = (xv.row(r).array() - mean).matrix();
    const T var = centered.squaredNorm() / static_cast<T>(d);
    inv(r) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = centered * inv(r);
  }
  Mat<T> out = xhat.array().rowwise() * value(gamma).row(0).array();
  out.rowwise() += value(beta).row(0);
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, x, gamma, beta, xhat = std::move(xhat), inv = std::move(inv)] {
      const auto& gy = grad(y);
      const Eigen::Index rows = gy.rows();
      const Eigen::Index cols = gy.cols();
      grad(gamma).row(0) += (gy.array() * xhat.array()).matrix().colwise().sum();
      grad(beta).row(0) += gy.colwise().sum();
      const auto g = value(gamma).row(0).array();
      auto& gx = grad(x);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Array<T, 1, Eigen::Dynamic> dxhat = gy.row(r).array() * g;
        const T s1 = dxhat.sum();
        const T s2 = (dxhat * xhat.row(r).array()).sum();
        gx.row(r).array() +=
            (inv(r) / static_cast<T>(cols)) *
            (static_cast<T>(cols) * dxhat - s1 - xhat.row(r).array() * s2);
      }
    };
  }
  return y;
}

template <class T>
Var Tape<T>::attention(Var q, Var k, Var v, const AttentionShape& s,
                       const std::vector<std::uint8_t>& key_pad, bool causal, T p, Rng* rng) {
  const auto& qv = value(q);
  const auto& kv = value(k);
  const auto& vv = value(v);
  const Eigen::Index d = qv.cols();
  if (d % s.heads != 0 || qv.rows() != s.batch * s.q_len || kv.rows() != s.batch * s.k_len) {
    throw std::invalid_argument("attention: inconsistent shapes");
  }
  const Eigen::Index dh = d / s.heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const bool drop = p > T(0) && rng != nullptr;
  const T keep_scale = drop ? T(1) / (T(1) - p) : T(1);
  const std::size_t blocks = static_cast<std::size_t>(s.batch) * static_cast<std::size_t>(s.heads);
  // probs[b*heads+h]: softmax weights; used[...]: weights after dropout.
  std::vector<Mat<T>> probs(blocks);
  std::vector<Mat<T>> used(drop ? blocks : 0);
  Mat<T> out(qv.rows(), d);
  constexpr T kNegInf = -std::numeric_limits<T>::infinity();
  for (int b = 0; b < s.batch; ++b) {
    for (int h = 0; h < s.heads; ++h) {
      const auto qb = qv.block(b * s.q_len, h * dh, s.q_len, dh);
      const auto kb = kv.block(b * s.k_len, h * dh, s.k_len, dh);
      const auto vb = vv.block(b * s.k_len, h * dh, s.k_len, dh);
      Mat<T> sc = (qb * kb.transpose()) * scale;
      for (int j = 0; j < s.k_len; ++j) {
        if (!key_pad.empty() && key_pad[static_cast<std::size_t>(b * s.k_len + j)]) {
          sc.col(j).setConstant(kNegInf);
        }
      }
      if (causal) {
        for (int i = 0; i < s.q_len; ++i) {
          for (int j = i + 1; j < s.k_len; ++j) {
            sc(i, j) = kNegInf;
          }
        }
      }
      for (int i = 0; i < s.q_len; ++i) {
        const T mx = sc.row(i).maxCoeff();
        // Vectorized exp clamps its input, so masked keys are zeroed explicitly.
        sc.row(i) = (sc.row(i).array() == kNegInf).select(T(0), (sc.row(i).array() - mx).exp()).matrix();
        sc.row(i) /= sc.row(i).sum();
      }
      const std::size_t idx = static_cast<std::size_t>(b * s.heads + h);
      if (drop) {
        const auto keep = dropout_mask(static_cast<std::size_t>(sc.size()), static_cast<double>(p), *rng);
        Mat<T> dropped(sc.rows(), sc.cols());
        for (Eigen::Index i = 0; i < sc.size(); ++i) {
          dropped.data()[i] = keep[static_cast<std::size_t>(i)] ? sc.data()[i] * keep_scale : T(0);
        }
        out.block(b * s.q_len, h * dh, s.q_len, dh).noalias() = dropped * vb;
        used[idx] = std::move(dropped);
      } else {
        out.block(b * s.q_len, h * dh, s.q_len, dh).noalias() = sc * vb;
      }
      probs[idx] = std::move(sc);
    }
  }
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, q, k, v, s, dh, scale, keep_scale, drop, probs = std::move(probs),
                    used = std::move(used)] {
      const auto& gy = grad(y);
      auto& gq = grad(q);
      auto& gk = grad(k);
      auto& gv = grad(v);
      const auto& qv2 = value(q);
      const auto& kv2 = value(k);
      const auto& vv2 = value(v);
      for (int b = 0; b < s.batch; ++b) {
        for (int h = 0; h < s.heads; ++h) {
          const std::size_t idx = static_cast<std::size_t>(b * s.heads + h);
          const Mat<T>& P = probs[idx];
          const Mat<T>& A = drop ? used[idx] : P;
          const auto go = gy.block(b * s.q_len, h * dh, s.q_len, dh);
          gv.block(b * s.k_len, h * dh, s.k_len, dh).noalias() += A.transpose() * go;
          Mat<T> dA = go * vv2.block(b * s.k_len, h * dh, s.k_len, dh).transpose();
          if (drop) {
            // d(dropped)/d(P) is keep * keep_scale; dropped == 0 exactly where dropped.
            for (Eigen::Index i = 0; i < dA.size(); ++i) {
              dA.data()[i] = A.data()[i] != T(0) || P.data()[i] == T(0) ? dA.data()[i] * keep_scale
                                                                          : T(0);
            }
          }
          Mat<T> dS(P.rows(), P.cols());
          for (Eigen::Index i = 0; i < P.rows(); ++i) {
            const T dot = (dA.row(i).array() * P.row(i).array()).sum();
            dS.row(i) = (P.row(i).array() * (dA.row(i).array() - dot)).matrix() * scale;
          }
          gq.block(b * s.q_len, h * dh, s.q_len, dh).noalias() +=
              dS * kv2.block(b * s.k_len, h * dh, s.k_len, dh);
          gk.block(b * s.k_len, h * dh, s.k_len, dh).noalias() +=
              dS.transpose() * qv2.block(b * s.q_len, h * dh, s.q_len, dh);
        }
      }
    };
  }
  return y;
}

template <class T>
Var Tape<T>::cross_entropy(Var logits, const std::vector<int>& labels) {
  const auto& lv = value(logits);
  if (static_cast<std::size_t>(lv.rows()) != labels.size()) {
    throw std::invalid_argument("cross_entropy: label count differs from logits rows");
  }
  Mat<T> soft(lv.rows(), lv.cols());
  T total = 0;
  int count = 0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 0) {
      soft.row(r).setZero();
      continue;
    }
    const T mx = lv.row(r).maxCoeff();
    soft.row(r) = (lv.row(r).array() - mx).exp().matrix();
    const T z = soft.row(r).sum();
    soft.row(r) /= z;
    total -= lv(r, label) - mx - std::log(z);
    ++count;
  }
  Mat<T> out(1, 1);
  out(0, 0) = count > 0 ? total / static_cast<T>(count) : T(0);
  const Var y = push(std::move(out));
  if (record_) {
    node(y).back = [this, y, logits, labels, soft = std::move(soft), count] {
      if (count == 0) {
        return;
      }
      const T g = grad(y)(0, 0) / static_cast<T>(count);
      auto& gl = grad(logits);
      for (Eigen::Index r = 0; r < gl.rows(); ++r) {
        const int label = labels[static_cast<std::size_t>(r)];
        if (label < 0) {
          continue;
        }
        gl.row(r) += soft.row(r) * g;
        gl(r, label) -= g;
      }
    };
  }
  return y;
}

template <class T>
void Tape<T>::backward(Var root) {
  if (!record_) {
    throw std::logic_error("backward on a tape that did not record");
  }
  grad(root).setConstant(T(1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->back) {
      it->back();
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace chemlab::nn
