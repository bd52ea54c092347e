// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/tokenizer/vocabulary.hpp"

#include <fstream>

namespace chemlab::tok {

UnknownSymbol::UnknownSymbol(std::size_t offset, const std::string& text)
    : std::runtime_error("no token matches '" + text + "' at offset " + std::to_string(offset)),
      offset_(offset) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty()) {
      throw std::invalid_argument("vocabulary: empty token");
    }
    if (!index_.emplace(t, static_cast<int>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate token '" + t + "'");
    }
    max_len_ = std::max(max_len_, t.size());
  }
  const auto need = [&](std::string_view s) {
    const auto found = id(s);
    if (!found) {
      throw std::invalid_argument("vocabulary: missing special token " + std::string(s));
    }
    return *found;
  };
  bos_ = need(kBos);
  eos_ = need(kEos);
  pad_ = need(kPad);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open vocabulary " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      tokens.push_back(line);
    }
  }
  return Vocabulary(std::move(tokens));
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw BadId("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<int> segment(std::string_view s, const Vocabulary& vocab) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = std::min(vocab.max_token_length(), s.size() - pos);
    std::optional<int> hit;
    for (; len > 0; --len) {
      hit = vocab.id(s.substr(pos, len));
      if (hit && !vocab.is_special(*hit)) {
        break;
      }
      hit.reset();
    }
    if (!hit) {
      throw UnknownSymbol(pos, std::string(s.substr(pos, 1)));
    }
    out.push_back(*hit);
    pos += len;
  }
  return out;
}

std::vector<std::string> segment_strings(std::string_view s, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const int id : segment(s, vocab)) {
    out.push_back(vocab.token(id));
  }
  return out;
}

TokenSequence tokenize(std::string_view s, const Vocabulary& vocab, SequenceKind kind) {
  TokenSequence t{{vocab.bos()}, kind};
  const auto body = segment(s, vocab);
  t.ids.insert(t.ids.end(), body.begin(), body.end());
  t.ids.push_back(vocab.eos());
  return t;
}

std::string detokenize(std::span<const int> ids, const Vocabulary& vocab) {
  std::string out;
  for (const int id : ids) {
    const auto& t = vocab.token(id);
    if (!vocab.is_special(id)) {
      out += t;
    }
  }
  return out;
}

std::span<const int> payload(std::span<const int> ids, const Vocabulary& vocab) {
  std::size_t begin = 0;
  if (!ids.empty() && ids.front() == vocab.bos()) {
    begin = 1;
  }
  std::size_t end = begin;
  while (end < ids.size() && ids[end] != vocab.eos()) {
    ++end;
  }
  return ids.subspan(begin, end - begin);
}

}  // namespace chemlab::tok
