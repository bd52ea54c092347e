// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemlab/transformer/tape.hpp"

namespace chemlab::nn {

enum class NormPlacement : std::uint8_t { PostLN, PreLN };
enum class InitScheme : std::uint8_t { DefaultUniform, HeNormal };

std::string_view to_string(NormPlacement p) noexcept;
std::string_view to_string(InitScheme s) noexcept;

struct ModelConfig {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int d_model = 128;
  int d_ff = 512;
  int n_layers = 2;
  int n_heads = 4;
  double dropout = 0.1;
  NormPlacement norm = NormPlacement::PostLN;
  InitScheme init = InitScheme::DefaultUniform;
  int max_len = 256;
  int pad_id = 2;

  /// Throws std::invalid_argument.
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Token rows padded to one length, stored row-major.
struct TokenBatch {
  int rows = 0;
  int len = 0;
  std::vector<int> ids;

  static TokenBatch pack(const std::vector<std::vector<int>>& seqs, int pad_id);
  int at(int r, int t) const { return ids[static_cast<std::size_t>(r * len + t)]; }
  /// 1 where the id equals pad_id.
  std::vector<std::uint8_t> pad_mask(int pad_id) const;
};

/// Sinusoidal position table, max_len x d.
template <class T>
Mat<T> positional_encoding(int max_len, int d);

/// Encoder-decoder Transformer with PyTorch nn.Transformer layout: separate
/// source and target embeddings scaled by sqrt(d_model), sinusoidal
/// positions, final layer norms on both stacks, untied output projection.
template <class T>
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  std::vector<Parameter<T>>& parameters() noexcept { return params_; }
  const std::vector<Parameter<T>>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept;
  Parameter<T>& parameter(std::string_view name);
  void zero_grad();

  /// Encoder output, (rows*len) x d_model. Dropout only when `rng` is set.
  Var encode(Tape<T>& tape, const TokenBatch& src, Rng* rng);
  /// Logits for every position of `tgt_in`, (rows*len) x tgt_vocab.
  Var decode(Tape<T>& tape, const TokenBatch& tgt_in, Var memory, const TokenBatch& src, Rng* rng);
  /// Mean token cross-entropy for predicting tgt[:,1:] from tgt[:,:-1].
  Var loss(Tape<T>& tape, const TokenBatch& src, const TokenBatch& tgt, Rng* rng);

  Mat<T> memory(const TokenBatch& src);
  /// Eval-mode logits, (rows*(tgt.len-1)) x vocab.
  Mat<T> teacher_forced_logits(const TokenBatch& src, const TokenBatch& tgt);

  /// Greedy decoding with cached keys and values. Each result starts with
  /// BOS and holds at most max_len further tokens, ending at the first EOS.
  /// When `step_logits` is non-null, row r of element t holds the logits
  /// that produced token t+1 of sequence r.
  std::vector<std::vector<int>> greedy_decode(const TokenBatch& src, int bos, int eos, int max_len,
                                              std::vector<Mat<T>>* step_logits = nullptr);

 private:
  struct Linear {
    int w, b;
  };
  struct Norm {
    int g, b;
  };
  struct Attention {
    Linear q, k, v, o;
  };
  struct EncoderLayer {
    Attention self;
    Linear ff1, ff2;
    Norm ln1, ln2;
  };
  struct DecoderLayer {
    Attention self, cross;
    Linear ff1, ff2;
    Norm ln1, ln2, ln3;
  };

  int add_param(const std::string& name, int rows, int cols);
  Linear add_linear(const std::string& name, int in, int out);
  Norm add_norm(const std::string& name);
  Attention add_attention(const std::string& name);
  void initialize(std::uint64_t seed);

  Var p(Tape<T>& tape, int idx) { return tape.param(params_[static_cast<std::size_t>(idx)]); }
  Var apply(Tape<T>& tape, const Linear& l, Var x) { return tape.linear(x, p(tape, l.w), p(tape, l.b)); }
  Var apply(Tape<T>& tape, const Norm& n, Var x) { return tape.layer_norm(x, p(tape, n.g), p(tape, n.b)); }
  Var attend(Tape<T>& tape, const Attention& a, Var xq, Var xkv, const AttentionShape& shape,
             const std::vector<std::uint8_t>& key_pad, bool causal, Rng* rng);
  Var feed_forward(Tape<T>& tape, const EncoderLayer& l, Var x, Rng* rng);
  Var feed_forward(Tape<T>& tape, const DecoderLayer& l, Var x, Rng* rng);
  Var embed(Tape<T>& tape, int table, const TokenBatch& b, int first_position, Rng* rng);
  T drop() const { return static_cast<T>(cfg_.dropout); }

  ModelConfig cfg_;
  std::vector<Parameter<T>> params_;
  std::vector<int> linear_weights_;
  int src_embed_ = -1;
  int tgt_embed_ = -1;
  std::vector<EncoderLayer> enc_;
  std::vector<DecoderLayer> dec_;
  Norm enc_norm_{};
  Norm dec_norm_{};
  Linear out_{};
  Mat<T> pe_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace chemlab::nn
