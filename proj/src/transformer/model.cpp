// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/transformer/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chemlab::nn {

std::string_view to_string(NormPlacement p) noexcept {
  return p == NormPlacement::PreLN ? "pre_ln" : "post_ln";
}

std::string_view to_string(InitScheme s) noexcept {
  return s == InitScheme::HeNormal ? "he_normal" : "default_uniform";
}

void ModelConfig::validate() const {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
  if (src_vocab < 4 || tgt_vocab < 4) fail("vocabulary sizes must be set");
  if (d_model < 1 || d_ff < 1 || n_layers < 1 || n_heads < 1) fail("dimensions must be positive");
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (max_len < 2) fail("max_len must be at least 2");
  if (pad_id < 0 || pad_id >= std::min(src_vocab, tgt_vocab)) fail("pad id outside vocabulary");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"src_vocab", c.src_vocab}, {"tgt_vocab", c.tgt_vocab}, {"d_model", c.d_model},
       {"d_ff", c.d_ff},           {"n_layers", c.n_layers},   {"n_heads", c.n_heads},
       {"dropout", c.dropout},     {"norm", to_string(c.norm)}, {"init", to_string(c.init)},
       {"max_len", c.max_len},     {"pad_id", c.pad_id}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.src_vocab = j.value("src_vocab", d.src_vocab);
  c.tgt_vocab = j.value("tgt_vocab", d.tgt_vocab);
  c.d_model = j.value("d_model", d.d_model);
  c.d_ff = j.value("d_ff", d.d_ff);
  c.n_layers = j.value("n_layers", d.n_layers);
  c.n_heads = j.value("n_heads", d.n_heads);
  c.dropout = j.value("dropout", d.dropout);
  c.max_len = j.value("max_len", d.max_len);
  c.pad_id = j.value("pad_id", d.pad_id);
  const auto norm = j.value("norm", std::string(to_string(d.norm)));
  if (norm == "pre_ln") {
    c.norm = NormPlacement::PreLN;
  } else if (norm == "post_ln") {
    c.norm = NormPlacement::PostLN;
  } else {
    throw std::invalid_argument("model config: unknown norm '" + norm + "'");
  }
  const auto init = j.value("init", std::string(to_string(d.init)));
  if (init == "he_normal") {
    c.init = InitScheme::HeNormal;
  } else if (init == "default_uniform") {
    c.init = InitScheme::DefaultUniform;
  } else {
    throw std::invalid_argument("model config: unknown init '" + init + "'");
  }
}

TokenBatch TokenBatch::pack(const std::vector<std::vector<int>>& seqs, int pad_id) {
  TokenBatch b;
  b.rows = static_cast<int>(seqs.size());
  for (const auto& s : seqs) {
    b.len = std::max(b.len, static_cast<int>(s.size()));
  }
  b.ids.assign(static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.len), pad_id);
  for (int r = 0; r < b.rows; ++r) {
    const auto& s = seqs[static_cast<std::size_t>(r)];
    std::copy(s.begin(), s.end(), b.ids.begin() + static_cast<std::ptrdiff_t>(r) * b.len);
  }
  return b;
}

std::vector<std::uint8_t> TokenBatch::pad_mask(int pad_id) const {
  std::vector<std::uint8_t> m(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    m[i] = ids[i] == pad_id ? 1 : 0;
  }
  return m;
}

template <class T>
Mat<T> positional_encoding(int max_len, int d) {
  Mat<T> pe(max_len, d);
  for (int pos = 0; pos < max_len; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
      pe(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < d) {
        pe(pos, i + 1) = static_cast<T>(std::cos(angle));
      }
    }
  }
  return pe;
}

template Mat<float> positional_encoding<float>(int, int);
template Mat<double> positional_encoding<double>(int, int);

template <class T>
int Model<T>::add_param(const std::string& name, int rows, int cols) {
  params_.push_back(Parameter<T>{name, Mat<T>::Zero(rows, cols), Mat<T>::Zero(rows, cols)});
  return static_cast<int>(params_.size()) - 1;
}

template <class T>
typename Model<T>::Linear Model<T>::add_linear(const std::string& name, int in, int out) {
  Linear l{add_param(name + ".w", in, out), add_param(name + ".b", 1, out)};
  linear_weights_.push_back(l.w);
  return l;
}

template <class T>
typename Model<T>::Norm Model<T>::add_norm(const std::string& name) {
  Norm n{add_param(name + ".g", 1, cfg_.d_model), add_param(name + ".b", 1, cfg_.d_model)};
  params_[static_cast<std::size_t>(n.g)].value.setOnes();
  return n;
}

template <class T>
typename Model<T>::Attention Model<T>::add_attention(const std::string& name) {
  const int d = cfg_.d_model;
  return Attention{add_linear(name + ".q", d, d), add_linear(name + ".k", d, d),
                   add_linear(name + ".v", d, d), add_linear(name + ".o", d, d)};
}

template <class T>
Model<T>::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg_.d_model;
  src_embed_ = add_param("src_embed", cfg_.src_vocab, d);
  tgt_embed_ = add_param("tgt_embed", cfg_.tgt_vocab, d);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string pre = "enc." + std::to_string(l);
    EncoderLayer e;
    e.self = add_attention(pre + ".self");
    e.ff1 = add_linear(pre + ".ff1", d, cfg_.d_ff);
    e.ff2 = add_linear(pre + ".ff2", cfg_.d_ff, d);
    e.ln1 = add_norm(pre + ".ln1");
    e.ln2 = add_norm(pre + ".ln2");
    enc_.push_back(e);
  }
  enc_norm_ = add_norm("enc.norm");
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    DecoderLayer x;
    x.self = add_attention(pre + ".self");
    x.cross = add_attention(pre + ".cross");
    x.ff1 = add_linear(pre + ".ff1", d, cfg_.d_ff);
    x.ff2 = add_linear(pre + ".ff2", cfg_.d_ff, d);
    x.ln1 = add_norm(pre + ".ln1");
    x.ln2 = add_norm(pre + ".ln2");
    x.ln3 = add_norm(pre + ".ln3");
    dec_.push_back(x);
  }
  dec_norm_ = add_norm("dec.norm");
  out_ = add_linear("out", d, cfg_.tgt_vocab);
  pe_ = positional_encoding<T>(cfg_.max_len, d);
  initialize(seed);
}

template <class T>
void Model<T>::initialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417));
  const auto xavier = [&](Mat<T>& w) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    }
  };
  const auto he = [&](Mat<T>& w) {
    const double sd = std::sqrt(2.0 / static_cast<double>(w.rows()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<T>(rng.normal() * sd);
    }
  };
  xavier(params_[static_cast<std::size_t>(src_embed_)].value);
  xavier(params_[static_cast<std::size_t>(tgt_embed_)].value);
  for (const int w : linear_weights_) {
    auto& m = params_[static_cast<std::size_t>(w)].value;
    if (cfg_.init == InitScheme::HeNormal) {
      he(m);
    } else {
      xavier(m);
    }
  }
}

template <class T>
std::size_t Model<T>::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

template <class T>
Parameter<T>& Model<T>::parameter(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) {
      return p;
    }
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

template <class T>
void Model<T>::zero_grad() {
  for (auto& p : params_) {
    p.grad.setZero(p.value.rows(), p.value.cols());
  }
}

template <class T>
Var Model<T>::embed(Tape<T>& tape, int table, const TokenBatch& b, int first_position, Rng* rng) {
  if (first_position + b.len > cfg_.max_len) {
    throw std::invalid_argument("sequence longer than max_len");
  }
  Mat<T> offset(static_cast<Eigen::Index>(b.ids.size()), cfg_.d_model);
  for (int r = 0; r < b.rows; ++r) {
    offset.block(r * b.len, 0, b.len, cfg_.d_model) = pe_.block(first_position, 0, b.len, cfg_.d_model);
  }
  for (const int id : b.ids) {
    const int limit = table == src_embed_ ? cfg_.src_vocab : cfg_.tgt_vocab;
    if (id < 0 || id >= limit) {
      throw std::invalid_argument("token id outside vocabulary");
    }
  }
  const Var x = tape.embed(p(tape, table), b.ids, std::sqrt(static_cast<T>(cfg_.d_model)), offset);
  return tape.dropout(x, drop(), rng);
}

template <class T>
Var Model<T>::attend(Tape<T>& tape, const Attention& a, Var xq, Var xkv, const AttentionShape& shape,
                     const std::vector<std::uint8_t>& key_pad, bool causal, Rng* rng) {
  const Var q = apply(tape, a.q, xq);
  const Var k = apply(tape, a.k, xkv);
  const Var v = apply(tape, a.v, xkv);
  const Var ctx = tape.attention(q, k, v, shape, key_pad, causal, drop(), rng);
  return apply(tape, a.o, ctx);
}

template <class T>
Var Model<T>::feed_forward(Tape<T>& tape, const EncoderLayer& l, Var x, Rng* rng) {
  const Var h = tape.dropout(tape.relu(apply(tape, l.ff1, x)), drop(), rng);
  return apply(tape, l.ff2, h);
}

template <class T>
Var Model<T>::feed_forward(Tape<T>& tape, const DecoderLayer& l, Var x, Rng* rng) {
  const Var h = tape.dropout(tape.relu(apply(tape, l.ff1, x)), drop(), rng);
  return apply(tape, l.ff2, h);
}

template <class T>
Var Model<T>::encode(Tape<T>& tape, const TokenBatch& src, Rng* rng) {
  const auto pad = src.pad_mask(cfg_.pad_id);
  const AttentionShape shape{src.rows, src.len, src.len, cfg_.n_heads};
  const bool pre = cfg_.norm == NormPlacement::PreLN;
  Var x = embed(tape, src_embed_, src, 0, rng);
  for (const auto& l : enc_) {
    if (pre) {
      const Var h = apply(tape, l.ln1, x);
      x = tape.add(x, tape.dropout(attend(tape, l.self, h, h, shape, pad, false, rng), drop(), rng));
      const Var h2 = apply(tape, l.ln2, x);
      x = tape.add(x, tape.dropout(feed_forward(tape, l, h2, rng), drop(), rng));
    } else {
      const Var a = tape.dropout(attend(tape, l.self, x, x, shape, pad, false, rng), drop(), rng);
      x = apply(tape, l.ln1, tape.add(x, a));
      const Var f = tape.dropout(feed_forward(tape, l, x, rng), drop(), rng);
      x = apply(tape, l.ln2, tape.add(x, f));
    }
  }
  return apply(tape, enc_norm_, x);
}

template <class T>
Var Model<T>::decode(Tape<T>& tape, const TokenBatch& tgt_in, Var memory, const TokenBatch& src,
                     Rng* rng) {
  if (tgt_in.rows != src.rows) {
    throw std::invalid_argument("decode: source and target batch sizes differ");
  }
  const auto tpad = tgt_in.pad_mask(cfg_.pad_id);
  const auto spad = src.pad_mask(cfg_.pad_id);
  const AttentionShape self_shape{tgt_in.rows, tgt_in.len, tgt_in.len, cfg_.n_heads};
  const AttentionShape cross_shape{tgt_in.rows, tgt_in.len, src.len, cfg_.n_heads};
  const bool pre = cfg_.norm == NormPlacement::PreLN;
  Var x = embed(tape, tgt_embed_, tgt_in, 0, rng);
  for (const auto& l : dec_) {
    if (pre) {
      const Var h = apply(tape, l.ln1, x);
      x = tape.add(x, tape.dropout(attend(tape, l.self, h, h, self_shape, tpad, true, rng), drop(), rng));
      const Var h2 = apply(tape, l.ln2, x);
      x = tape.add(x, tape.dropout(attend(tape, l.cross, h2, memory, cross_shape, spad, false, rng),
                                   drop(), rng));
      const Var h3 = apply(tape, l.ln3, x);
      x = tape.add(x, tape.dropout(feed_forward(tape, l, h3, rng), drop(), rng));
    } else {
      const Var a = tape.dropout(attend(tape, l.self, x, x, self_shape, tpad, true, rng), drop(), rng);
      x = apply(tape, l.ln1, tape.add(x, a));
      const Var c =
          tape.dropout(attend(tape, l.cross, x, memory, cross_shape, spad, false, rng), drop(), rng);
      x = apply(tape, l.ln2, tape.add(x, c));
      const Var f = tape.dropout(feed_forward(tape, l, x, rng), drop(), rng);
      x = apply(tape, l.ln3, tape.add(x, f));
    }
  }
  return apply(tape, out_, apply(tape, dec_norm_, x));
}

namespace {

template <class T>
void split_target(const TokenBatch& tgt, int pad_id, TokenBatch& input, std::vector<int>& labels) {
  if (tgt.len < 2) {
    throw std::invalid_argument("target rows need at least BOS and one more token");
  }
  input.rows = tgt.rows;
  input.len = tgt.len - 1;
  input.ids.resize(static_cast<std::size_t>(input.rows * input.len));
  labels.resize(input.ids.size());
  for (int r = 0; r < tgt.rows; ++r) {
    for (int t = 0; t < input.len; ++t) {
      const auto i = static_cast<std::size_t>(r * input.len + t);
      input.ids[i] = tgt.at(r, t);
      const int next = tgt.at(r, t + 1);
      labels[i] = next == pad_id ? -1 : next;
    }
  }
}

}  // namespace

template <class T>
Var Model<T>::loss(Tape<T>& tape, const TokenBatch& src, const TokenBatch& tgt, Rng* rng) {
  TokenBatch input;
  std::vector<int> labels;
  split_target<T>(tgt, cfg_.pad_id, input, labels);
  const Var mem = encode(tape, src, rng);
  const Var logits = decode(tape, input, mem, src, rng);
  return tape.cross_entropy(logits, labels);
}

template <class T>
Mat<T> Model<T>::memory(const TokenBatch& src) {
  Tape<T> tape(false);
  return tape.value(encode(tape, src, nullptr));
}

template <class T>
Mat<T> Model<T>::teacher_forced_logits(const TokenBatch& src, const TokenBatch& tgt) {
  TokenBatch input;
  std::vector<int> labels;
  split_target<T>(tgt, cfg_.pad_id, input, labels);
  Tape<T> tape(false);
  const Var mem = encode(tape, src, nullptr);
  return tape.value(decode(tape, input, mem, src, nullptr));
}

namespace {

template <class T>
Mat<T> dense(const Mat<T>& x, const Parameter<T>& w, const Parameter<T>& b) {
  Mat<T> y = x * w.value;
  y.rowwise() += b.value.row(0);
  return y;
}

template <class T>
Mat<T> norm_rows(const Mat<T>& x, const Parameter<T>& g, const Parameter<T>& b) {
  Mat<T> y(x.rows(), x.cols());
  const auto d = static_cast<T>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).matrix();
    const T inv = T(1) / std::sqrt(centered.squaredNorm() / d + T(1e-5));
    y.row(r) = ((centered * inv).array() * g.value.row(0).array()).matrix() + b.value.row(0);
  }
  return y;
}

// One query row per batch entry against `count` keys stored at rows
// b*stride .. b*stride+count-1.
template <class T>
Mat<T> attend_rows(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v, int stride, int count,
                   const std::vector<std::uint8_t>* key_pad, int heads) {
  const Eigen::Index d = q.cols();
  const Eigen::Index dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Mat<T> out(q.rows(), d);
  Eigen::Matrix<T, 1, Eigen::Dynamic> w(count);
  for (Eigen::Index b = 0; b < q.rows(); ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto kb = k.block(b * stride, h * dh, count, dh);
      w.noalias() = q.block(b, h * dh, 1, dh) * kb.transpose() * scale;
      if (key_pad != nullptr) {
        for (int j = 0; j < count; ++j) {
          if ((*key_pad)[static_cast<std::size_t>(b * stride + j)]) {
            w(j) = -std::numeric_limits<T>::infinity();
          }
        }
      }
      const T mx = w.maxCoeff();
      // Vectorized exp clamps its input, so masked keys are zeroed explicitly.
      w = (w.array() == -std::numeric_limits<T>::infinity()).select(T(0), (w.array() - mx).exp()).matrix();
      w /= w.sum();
      out.block(b, h * dh, 1, dh).noalias() = w * v.block(b * stride, h * dh, count, dh);
    }
  }
  return out;
}

}  // namespace

template <class T>
std::vector<std::vector<int>> Model<T>::greedy_decode(const TokenBatch& src, int bos, int eos,
                                                      int max_len, std::vector<Mat<T>>* step_logits) {
  const int rows = src.rows;
  const int d = cfg_.d_model;
  const int steps = std::min(max_len, cfg_.max_len - 1);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(rows), std::vector<int>{bos});
  if (step_logits != nullptr) {
    step_logits->clear();
  }
  if (rows == 0 || steps <= 0) {
    return out;
  }
  const auto P = [&](int idx) -> const Parameter<T>& { return params_[static_cast<std::size_t>(idx)]; };
  const Mat<T> mem = memory(src);
  const auto spad = src.pad_mask(cfg_.pad_id);
  const std::size_t layers = dec_.size();
  std::vector<Mat<T>> cross_k(layers);
  std::vector<Mat<T>> cross_v(layers);
  std::vector<Mat<T>> self_k(layers, Mat<T>::Zero(static_cast<Eigen::Index>(rows) * steps, d));
  std::vector<Mat<T>> self_v(layers, Mat<T>::Zero(static_cast<Eigen::Index>(rows) * steps, d));
  for (std::size_t l = 0; l < layers; ++l) {
    cross_k[l] = dense(mem, P(dec_[l].cross.k.w), P(dec_[l].cross.k.b));
    cross_v[l] = dense(mem, P(dec_[l].cross.v.w), P(dec_[l].cross.v.b));
  }
  const bool pre = cfg_.norm == NormPlacement::PreLN;
  const T emb_scale = std::sqrt(static_cast<T>(d));
  std::vector<bool> done(static_cast<std::size_t>(rows), false);
  std::vector<int> current(static_cast<std::size_t>(rows), bos);
  Mat<T> x(rows, d);
  for (int t = 0; t < steps; ++t) {
    const auto& table = P(tgt_embed_).value;
    for (int r = 0; r < rows; ++r) {
      x.row(r) = table.row(current[static_cast<std::size_t>(r)]) * emb_scale + pe_.row(t);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& L = dec_[l];
      const auto self_block = [&](const Mat<T>& h) {
        const Mat<T> q = dense(h, P(L.self.q.w), P(L.self.q.b));
        const Mat<T> k = dense(h, P(L.self.k.w), P(L.self.k.b));
        const Mat<T> v = dense(h, P(L.self.v.w), P(L.self.v.b));
        for (int r = 0; r < rows; ++r) {
          self_k[l].row(r * steps + t) = k.row(r);
          self_v[l].row(r * steps + t) = v.row(r);
        }
        return dense(attend_rows(q, self_k[l], self_v[l], steps, t + 1, nullptr, cfg_.n_heads),
                     P(L.self.o.w), P(L.self.o.b));
      };
      const auto cross_block = [&](const Mat<T>& h) {
        const Mat<T> q = dense(h, P(L.cross.q.w), P(L.cross.q.b));
        return dense(attend_rows(q, cross_k[l], cross_v[l], src.len, src.len, &spad, cfg_.n_heads),
                     P(L.cross.o.w), P(L.cross.o.b));
      };
      const auto ff_block = [&](const Mat<T>& h) {
        const Mat<T> a = dense(h, P(L.ff1.w), P(L.ff1.b)).cwiseMax(T(0));
        return dense(a, P(L.ff2.w), P(L.ff2.b));
      };
      if (pre) {
        x += self_block(norm_rows(x, P(L.ln1.g), P(L.ln1.b)));
        x += cross_block(norm_rows(x, P(L.ln2.g), P(L.ln2.b)));
        x += ff_block(norm_rows(x, P(L.ln3.g), P(L.ln3.b)));
      } else {
        x = norm_rows(Mat<T>(x + self_block(x)), P(L.ln1.g), P(L.ln1.b));
        x = norm_rows(Mat<T>(x + cross_block(x)), P(L.ln2.g), P(L.ln2.b));
        x = norm_rows(Mat<T>(x + ff_block(x)), P(L.ln3.g), P(L.ln3.b));
      }
    }
    Mat<T> logits = dense(norm_rows(x, P(dec_norm_.g), P(dec_norm_.b)), P(out_.w), P(out_.b));
    bool all_done = true;
    for (int r = 0; r < rows; ++r) {
      const auto ur = static_cast<std::size_t>(r);
      if (done[ur]) {
        continue;
      }
      Eigen::Index best = 0;
      logits.row(r).maxCoeff(&best);
      out[ur].push_back(static_cast<int>(best));
      current[ur] = static_cast<int>(best);
      if (best == eos) {
        done[ur] = true;
      } else {
        all_done = false;
      }
    }
    if (step_logits != nullptr) {
      step_logits->push_back(std::move(logits));
    }
    if (all_done) {
      break;
    }
  }
  return out;
}

template class Model<float>;
template class Model<double>;

}  // namespace chemlab::nn
