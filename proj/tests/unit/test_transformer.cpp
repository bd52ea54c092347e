// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "chemlab/training/optimizer.hpp"
#include "chemlab/transformer/checkpoint.hpp"
#include "chemlab/transformer/model.hpp"
#include "chemlab/transformer/pooling.hpp"
#include "gradcheck.hpp"

using namespace chemlab;
using namespace chemlab::nn;
using testing::tiny_batch;
using testing::tiny_config;

namespace {

double max_abs_diff(const Mat<float>& a, const Mat<float>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

TokenBatch with_padding(const TokenBatch& b, int extra, int pad) {
  std::vector<std::vector<int>> rows;
  for (int r = 0; r < b.rows; ++r) {
    std::vector<int> row(b.ids.begin() + r * b.len, b.ids.begin() + (r + 1) * b.len);
    row.insert(row.end(), static_cast<std::size_t>(extra), pad);
    rows.push_back(row);
  }
  return TokenBatch::pack(rows, pad);
}

}  // namespace

TEST_CASE("config validation") {
  auto c = tiny_config();
  CHECK_NOTHROW(c.validate());
  c.n_heads = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.dropout = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initialization is a function of config and seed") {
  const auto c = tiny_config();
  Model<float> a(c, 5);
  Model<float> b(c, 5);
  Model<float> d(c, 6);
  bool differs = false;
  for (std::size_t k = 0; k < a.parameters().size(); ++k) {
    CHECK(a.parameters()[k].value == b.parameters()[k].value);
    differs = differs || a.parameters()[k].value != d.parameters()[k].value;
  }
  CHECK(differs);
}

TEST_CASE("he_normal variance matches 2/fan_in") {
  auto c = tiny_config(64);
  c.d_ff = 512;
  c.n_layers = 2;
  c.init = InitScheme::HeNormal;
  Model<double> m(c, 9);
  double sum = 0.0;
  double sq = 0.0;
  long n = 0;
  for (const auto& p : m.parameters()) {
    if (p.name.ends_with(".ff2.w")) {
      sum += p.value.sum();
      sq += p.value.squaredNorm();
      n += p.value.size();
    }
  }
  REQUIRE(n >= 100000);
  const double mean = sum / static_cast<double>(n);
  const double var = sq / static_cast<double>(n) - mean * mean;
  CHECK(var == doctest::Approx(2.0 / 512).epsilon(0.1));
}

TEST_CASE("pre-LN and post-LN share parameter counts and shapes") {
  Model<float> post(tiny_config(16, NormPlacement::PostLN), 1);
  Model<float> pre(tiny_config(16, NormPlacement::PreLN), 1);
  CHECK(post.parameter_count() == pre.parameter_count());
  const auto b = tiny_batch(post.config(), 4);
  CHECK(post.teacher_forced_logits(b.src, b.tgt).rows() == pre.teacher_forced_logits(b.src, b.tgt).rows());
  CHECK(post.teacher_forced_logits(b.src, b.tgt).cols() == pre.teacher_forced_logits(b.src, b.tgt).cols());
}

TEST_CASE("encoder output shape and finiteness") {
  Model<float> m(tiny_config(), 2);
  const auto bare = TokenBatch::pack({{0, 1}}, 2);
  CHECK(m.memory(bare).rows() == 2);
  const auto b = tiny_batch(m.config(), 11, 6);
  CHECK(m.memory(b.src).allFinite());
}

TEST_CASE("batch order does not change per-example outputs") {
  Model<float> m(tiny_config(), 3);
  const auto b = tiny_batch(m.config(), 12, 4);
  const auto mem = m.memory(b.src);
  std::vector<std::vector<int>> reversed;
  for (int r = b.src.rows - 1; r >= 0; --r) {
    reversed.emplace_back(b.src.ids.begin() + r * b.src.len, b.src.ids.begin() + (r + 1) * b.src.len);
  }
  const auto mem2 = m.memory(TokenBatch::pack(reversed, 2));
  const int len = b.src.len;
  for (int r = 0; r < b.src.rows; ++r) {
    const int s = b.src.rows - 1 - r;
    CHECK(max_abs_diff(mem.middleRows(r * len, len), mem2.middleRows(s * len, len)) < 1e-5);
  }
}

TEST_CASE("teacher forcing is causal") {
  Model<float> m(tiny_config(), 4);
  auto b = tiny_batch(m.config(), 13, 1);
  const auto base = m.teacher_forced_logits(b.src, b.tgt);
  const int t = 2;
  b.tgt.ids[t] = b.tgt.ids[t] == 5 ? 6 : 5;
  const auto changed = m.teacher_forced_logits(b.src, b.tgt);
  for (int j = 0; j < t; ++j) {
    CHECK(max_abs_diff(base.row(j), changed.row(j)) < 1e-6);
  }
  CHECK(max_abs_diff(base.row(t), changed.row(t)) > 1e-6);
}

TEST_CASE("softmax rows sum to one") {
  Model<double> m(testing::tiny_config(), 4);
  const auto b = tiny_batch(m.config(), 14);
  const auto logits = m.teacher_forced_logits(b.src, b.tgt);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    CHECK((logits.row(r).array() - lse).exp().sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("loss values") {
  Model<double> m(tiny_config(), 5);
  const auto b = tiny_batch(m.config(), 15);
  SUBCASE("uniform logits give ln V") {
    m.parameter("out.w").value.setZero();
    m.parameter("out.b").value.setZero();
    CHECK(testing::loss_value(m, b) == doctest::Approx(std::log(13.0)).epsilon(1e-12));
  }
  SUBCASE("PAD suffix leaves the loss unchanged") {
    const testing::TinyBatch padded{with_padding(b.src, 3, 2), with_padding(b.tgt, 4, 2)};
    CHECK(testing::loss_value(m, padded) == doctest::Approx(testing::loss_value(m, b)).epsilon(1e-10));
  }
  SUBCASE("confident correct logits drive the loss to zero") {
    m.parameter("out.w").value.setZero();
    auto& bias = m.parameter("out.b").value;
    // Single-row target where every label is the same token.
    const testing::TinyBatch one{TokenBatch::pack({{0, 4, 1}}, 2), TokenBatch::pack({{0, 7, 7, 7}}, 2)};
    bias.setZero();
    bias(0, 7) = 50.0;
    CHECK(testing::loss_value(m, one) < 1e-12);
  }
}

TEST_CASE("PAD embedding rows receive no gradient") {
  Model<double> m(tiny_config(), 6);
  testing::jitter(m, 1);
  const auto b = tiny_batch(m.config(), 16, 4);
  m.zero_grad();
  Tape<double> tape;
  tape.backward(m.loss(tape, b.src, b.tgt, nullptr));
  CHECK(m.parameter("src_embed").grad.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.parameter("tgt_embed").grad.row(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradients match central differences") {
  for (const auto norm : {NormPlacement::PostLN, NormPlacement::PreLN}) {
    Model<double> m(tiny_config(16, norm), 7);
    testing::jitter(m, 2);
    const auto b = tiny_batch(m.config(), 17);
    double worst = 0.0;
    int checked = 0;
    for (const auto& [kind, samples] : testing::gradient_check(m, b, 4, 3)) {
      for (const auto& s : samples) {
        worst = std::max(worst, s.relative_error());
        ++checked;
      }
    }
    CHECK(checked >= 20);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("greedy decoding") {
  Model<float> m(tiny_config(), 8);
  const auto b = tiny_batch(m.config(), 18);
  const auto one = m.greedy_decode(b.src, 0, 1, 1);
  for (const auto& s : one) {
    CHECK(s.size() <= 2);
    CHECK(s.front() == 0);
  }
  const auto x = m.greedy_decode(b.src, 0, 1, 10);
  CHECK(x == m.greedy_decode(b.src, 0, 1, 10));
  CHECK(x == m.greedy_decode(with_padding(b.src, 5, 2), 0, 1, 10));
}

TEST_CASE("a memorized pair decodes exactly") {
  auto c = tiny_config(32);
  Model<float> m(c, 9);
  train::OptimizerConfig oc;
  oc.weight_decay = 0.0;
  train::Adam<float> adam(oc, m.parameters());
  const auto src = TokenBatch::pack({{0, 4, 5, 6, 7, 1}}, 2);
  const auto tgt = TokenBatch::pack({{0, 8, 9, 10, 11, 12, 1}}, 2);
  for (int i = 0; i < 150; ++i) {
    m.zero_grad();
    Tape<float> tape;
    tape.backward(m.loss(tape, src, tgt, nullptr));
    adam.step(m.parameters(), 3e-3);
  }
  const auto out = m.greedy_decode(src, 0, 1, 10);
  CHECK(out.front() == std::vector<int>{0, 8, 9, 10, 11, 12, 1});
}

TEST_CASE("pooling") {
  const int d = 512;
  const auto src = TokenBatch::pack({{0, 5, 6, 1}, {0, 1}}, 2);
  Mat<float> mem = Mat<float>::Random(src.rows * src.len, d);
  CHECK(pool_memory(mem, src, 2, Pooling::Mean).cols() == 512);
  CHECK(pool_memory(mem, src, 2, Pooling::First).cols() == 512);
  CHECK(pool_memory(mem, src, 2, Pooling::Cat4).cols() == 2048);
  CHECK(pool_memory(mem, src, 2, Pooling::Cat6).cols() == 3072);

  SUBCASE("single position") {
    const auto single = TokenBatch::pack({{7}}, 2);
    Mat<float> row = Mat<float>::Random(1, 8);
    const auto p = pool_memory(row, single, 2, Pooling::Cat6);
    for (int s = 0; s < 6; ++s) {
      const Mat<float> block = p.block(0, s * 8, 1, 8);
      if (s == 3) {
        CHECK(block.cwiseAbs().maxCoeff() == 0.0f);
      } else {
        CHECK(block == row);
      }
    }
  }
  SUBCASE("constant rows") {
    const auto three = TokenBatch::pack({{0, 5, 1}}, 2);
    Mat<float> c(3, 8);
    const Mat<float> v = Mat<float>::Random(1, 8);
    for (int r = 0; r < 3; ++r) {
      c.row(r) = v;
    }
    const auto p = pool_memory(c, three, 2, Pooling::Cat4);
    for (int s = 0; s < 4; ++s) {
      CHECK(max_abs_diff(p.block(0, s * 8, 1, 8), v) < 1e-6);
    }
  }
  SUBCASE("PAD suffix is ignored") {
    Model<float> m(tiny_config(), 10);
    const auto b = tiny_batch(m.config(), 19);
    const auto padded = with_padding(b.src, 4, 2);
    for (const auto method : {Pooling::Mean, Pooling::First, Pooling::Cat4, Pooling::Cat6}) {
      CHECK(max_abs_diff(pool_memory(m.memory(b.src), b.src, 2, method),
                         pool_memory(m.memory(padded), padded, 2, method)) < 1e-5);
    }
  }
  CHECK(pooling_from_string("cat6") == Pooling::Cat6);
  CHECK_FALSE(pooling_from_string("sum").has_value());
}

TEST_CASE("checkpoint round trip is bit-exact") {
  Model<float> m(tiny_config(), 11);
  auto ckpt = snapshot(m);
  ckpt.step = 42;
  ckpt.rng_state = "state";
  ckpt.meta["note"] = "x";
  for (const auto& w : ckpt.weights) {
    ckpt.first_moment.push_back({w.name, Mat<float>::Constant(w.value.rows(), w.value.cols(), 0.25f)});
  }
  const auto path = std::filesystem::temp_directory_path() / "chemlab_roundtrip.ckpt";
  save_checkpoint(path, ckpt);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(back.step == 42);
  CHECK(back.rng_state == "state");
  CHECK(back.meta["note"] == "x");
  REQUIRE(back.weights.size() == ckpt.weights.size());
  for (std::size_t k = 0; k < ckpt.weights.size(); ++k) {
    CHECK(back.weights[k].name == ckpt.weights[k].name);
    CHECK(back.weights[k].value == ckpt.weights[k].value);
    CHECK(back.first_moment[k].value == ckpt.first_moment[k].value);
  }
  auto restored = restore_model(back);
  const auto b = tiny_batch(m.config(), 20);
  CHECK(restored.teacher_forced_logits(b.src, b.tgt) == m.teacher_forced_logits(b.src, b.tgt));
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "chemlab_bad.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPT";
  }
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}
