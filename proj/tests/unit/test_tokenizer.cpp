// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/synth/generator.hpp"
#include "chemlab/tokenizer/bucketing.hpp"
#include "chemlab/util/rng.hpp"
#include "test_support.hpp"

using namespace chemlab;
using namespace chemlab::tok;

TEST_CASE("vocabulary files load with specials first") {
  const auto& v = testing::smiles_vocab();
  CHECK(v.bos() == 0);
  CHECK(v.eos() == 1);
  CHECK(v.pad() == 2);
  CHECK(v.token(v.bos()) == kBos);
  const auto inchi = Vocabulary::load(testing::vocab_dir() / "inchi.txt");
  CHECK(inchi.id("@@").has_value());
  CHECK_THROWS_AS(v.token(v.size()), BadId);
  CHECK_THROWS_AS(Vocabulary({"<s>", "C"}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<s>", "</s>", "<pad>", "C", "C"}), std::invalid_argument);
}

TEST_CASE("greedy longest match keeps multi-character tokens whole") {
  const auto& v = testing::smiles_vocab();
  CHECK(segment_strings("ClCCBr", v) == std::vector<std::string>{"Cl", "C", "C", "Br"});
  CHECK(segment_strings("[C@@H]", v) == std::vector<std::string>{"[", "C", "@@", "H", "]"});
  const auto n = segment_strings("N[C@H](C)O", v);
  CHECK(n.size() == 10);
  CHECK(std::count(n.begin(), n.end(), "@") == 1);
  CHECK(std::count(n.begin(), n.end(), "@@") == 0);
}

TEST_CASE("tokenize adds BOS and EOS and reports unknown symbols") {
  const auto& v = testing::smiles_vocab();
  const auto t = tokenize("CO", v);
  CHECK(t.ids == std::vector<int>{v.bos(), *v.id("C"), *v.id("O"), v.eos()});
  try {
    tokenize("CC$C", v);
    FAIL("no error");
  } catch (const UnknownSymbol& e) {
    CHECK(e.offset() == 2);
  }
}

TEST_CASE("detokenize inverts tokenize and strips specials") {
  const auto& v = testing::smiles_vocab();
  synth::GeneratorConfig g;
  g.count = 1000;
  g.seed = 21;
  for (const auto& s : synth::generate_smiles(g)) {
    const auto c = mol::canonical_smiles(mol::parse_smiles(s));
    CHECK(detokenize(tokenize(c, v), v) == c);
    CHECK(detokenize(tokenize(s, v), v) == s);
  }
  CHECK(detokenize(std::vector<int>{v.bos(), v.eos()}, v).empty());
  auto padded = tokenize("CCN", v).ids;
  padded.insert(padded.end(), 3, v.pad());
  CHECK(detokenize(padded, v) == "CCN");
  const std::vector<int> ids{v.bos(), *v.id("C"), v.eos(), v.pad()};
  CHECK(std::vector<int>(payload(ids, v).begin(), payload(ids, v).end()) == std::vector<int>{*v.id("C")});
}

TEST_CASE("bucketing arithmetic") {
  SUBCASE("one sequence exactly at the budget") {
    const std::vector<PairLength> l{{10, 14}};
    const auto b = bucket_batches(l, {24, 8}, 1);
    REQUIRE(b.size() == 1);
    CHECK(b[0].indices.size() == 1);
  }
  SUBCASE("ten equal pairs, budget five pairs") {
    const std::vector<PairLength> l(10, PairLength{12, 12});
    const auto b = bucket_batches(l, {5 * 24, 8}, 3);
    REQUIRE(b.size() == 2);
    CHECK(b[0].indices.size() == 5);
    CHECK(b[1].indices.size() == 5);
  }
  SUBCASE("too long") {
    const std::vector<PairLength> l{{10, 15}};
    CHECK_THROWS_AS(bucket_batches(l, {24, 8}, 1), SequenceTooLong);
  }
}

TEST_CASE("bucketing covers every example once within the budget") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PairLength> l;
    const int n = 1 + static_cast<int>(rng.below(300));
    for (int i = 0; i < n; ++i) {
      l.push_back({2 + static_cast<int>(rng.below(60)), 2 + static_cast<int>(rng.below(60))});
    }
    const BucketConfig cfg{200 + static_cast<long>(rng.below(2000)), 1 + static_cast<int>(rng.below(10))};
    const auto batches = bucket_batches(l, cfg, rng.next_u64());
    std::vector<int> seen;
    for (const auto& b : batches) {
      CHECK(b.padded_tokens() <= cfg.token_budget);
      for (const int i : b.indices) {
        CHECK(l[static_cast<std::size_t>(i)].src <= b.src_len);
        CHECK(l[static_cast<std::size_t>(i)].tgt <= b.tgt_len);
      }
      seen.insert(seen.end(), b.indices.begin(), b.indices.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    CHECK(seen == all);
  }
}

TEST_CASE("bucketing is deterministic per seed and manifests round trip") {
  std::vector<PairLength> l;
  for (int i = 0; i < 100; ++i) {
    l.push_back({5 + i % 30, 7 + i % 25});
  }
  const auto a = bucket_batches(l, {512, 8}, 9);
  const auto b = bucket_batches(l, {512, 8}, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].indices == b[i].indices);
  }
  const auto path = std::filesystem::temp_directory_path() / "chemlab_manifest_test.jsonl";
  write_manifest(path, a);
  const auto back = read_manifest(path);
  REQUIRE(back.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[i].indices == a[i].indices);
    CHECK(back[i].src_len == a[i].src_len);
    CHECK(back[i].tgt_len == a[i].tgt_len);
  }
  std::filesystem::remove(path);
}
