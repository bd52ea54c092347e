// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/tokenizer/bucketing.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "chemlab/util/rng.hpp"

namespace chemlab::tok {

std::vector<Batch> bucket_batches(std::span<const PairLength> lengths, const BucketConfig& cfg,
                                  std::uint64_t seed) {
  if (cfg.bucket_width < 1) {
    throw std::invalid_argument("bucket width must be positive");
  }
  std::map<int, std::vector<int>> buckets;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto& l = lengths[i];
    if (l.src + l.tgt > cfg.token_budget) {
      throw SequenceTooLong("example " + std::to_string(i) + " needs " +
                            std::to_string(l.src + l.tgt) + " tokens, budget is " +
                            std::to_string(cfg.token_budget));
    }
    buckets[(std::max(l.src, l.tgt) - 1) / cfg.bucket_width].push_back(static_cast<int>(i));
  }
  Rng rng(seed);
  std::vector<Batch> batches;
  for (auto& [key, members] : buckets) {
    rng.shuffle(members.begin(), members.end());
    Batch cur;
    for (const int idx : members) {
      const auto& l = lengths[static_cast<std::size_t>(idx)];
      const int src = std::max(cur.src_len, l.src);
      const int tgt = std::max(cur.tgt_len, l.tgt);
      const long cost = static_cast<long>(cur.indices.size() + 1) * (src + tgt);
      if (!cur.indices.empty() && cost > cfg.token_budget) {
        batches.push_back(std::move(cur));
        cur = Batch{};
      }
      cur.indices.push_back(idx);
      cur.src_len = std::max(cur.src_len, l.src);
      cur.tgt_len = std::max(cur.tgt_len, l.tgt);
    }
    if (!cur.indices.empty()) {
      batches.push_back(std::move(cur));
    }
  }
  rng.shuffle(batches.begin(), batches.end());
  return batches;
}

void write_manifest(const std::filesystem::path& path, std::span<const Batch> batches) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  for (std::size_t i = 0; i < batches.size(); ++i) {
    nlohmann::json j = {{"batch", i},
                        {"src_len", batches[i].src_len},
                        {"tgt_len", batches[i].tgt_len},
                        {"indices", batches[i].indices}};
    out << j.dump() << '\n';
  }
}

std::vector<Batch> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::vector<Batch> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto j = nlohmann::json::parse(line);
    Batch b;
    b.src_len = j.at("src_len").get<int>();
    b.tgt_len = j.at("tgt_len").get<int>();
    b.indices = j.at("indices").get<std::vector<int>>();
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace chemlab::tok
