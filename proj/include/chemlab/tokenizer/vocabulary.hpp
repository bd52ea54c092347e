// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chemlab::tok {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kPad = "<pad>";

class UnknownSymbol : public std::runtime_error {
 public:
  UnknownSymbol(std::size_t offset, const std::string& text);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class BadId : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Vocabulary {
 public:
  /// Tokens in id order. The three special tokens must each appear once.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// One token per line; blank lines are ignored.
  static Vocabulary load(const std::filesystem::path& path);

  int bos() const noexcept { return bos_; }
  int eos() const noexcept { return eos_; }
  int pad() const noexcept { return pad_; }
  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  bool is_special(int id) const noexcept { return id == bos_ || id == eos_ || id == pad_; }

  const std::string& token(int id) const;
  std::optional<int> id(std::string_view token) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t max_token_length() const noexcept { return max_len_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::size_t max_len_ = 0;
  int bos_ = -1;
  int eos_ = -1;
  int pad_ = -1;
};

enum class SequenceKind : std::uint8_t { Source, Target };

/// Integer token stream. Both kinds carry BOS ... EOS; PAD only as a suffix.
struct TokenSequence {
  std::vector<int> ids;
  SequenceKind kind = SequenceKind::Target;
};

/// Greedy longest-match segmentation of `s` into token ids, no specials.
std::vector<int> segment(std::string_view s, const Vocabulary& vocab);

/// Token strings of the segmentation, for inspection and tests.
std::vector<std::string> segment_strings(std::string_view s, const Vocabulary& vocab);

TokenSequence tokenize(std::string_view s, const Vocabulary& vocab,
                       SequenceKind kind = SequenceKind::Target);

/// Concatenates token strings with specials removed.
std::string detokenize(std::span<const int> ids, const Vocabulary& vocab);
inline std::string detokenize(const TokenSequence& t, const Vocabulary& vocab) {
  return detokenize(t.ids, vocab);
}

/// Payload up to (excluding) the first EOS, with a leading BOS dropped.
std::span<const int> payload(std::span<const int> ids, const Vocabulary& vocab);

}  // namespace chemlab::tok
