// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/structure.hpp"
#include "chemlab/probe/dataset.hpp"
#include "chemlab/probe/probe.hpp"
#include "test_support.hpp"

using namespace chemlab;
using namespace chemlab::probe;
namespace fs = std::filesystem;

namespace {

PropertyDataset dataset_of(const std::vector<std::string>& smiles, TaskType task = TaskType::Regression) {
  PropertyDataset ds;
  ds.name = "fixture";
  ds.task = task;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    const auto m = mol::parse_smiles(smiles[i]);
    ds.records.push_back({mol::canonical_smiles(m), static_cast<double>(i % 2), m});
  }
  ds.rows = static_cast<long>(ds.records.size());
  return ds;
}

PropertyDataset unlabeled(int n, TaskType task) {
  PropertyDataset ds;
  ds.task = task;
  ds.records.resize(static_cast<std::size_t>(n));
  ds.rows = n;
  return ds;
}

// Pairwise definition: a positive outranking a negative scores 1, a tie 1/2.
double auroc_brute(const std::vector<double>& y, const std::vector<double>& s) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[i] == 1.0 && y[j] == 0.0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
  }
  return wins / pairs;
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> linker_series(int n) {
  std::vector<std::string> out;
  for (int k = 0; k < n; ++k) {
    out.push_back("C1CC1" + std::string(static_cast<std::size_t>(k), 'C') + "C1CCC1");
  }
  return out;
}

}  // namespace

TEST_CASE("AUROC and RMSE against brute force") {
  const std::vector<double> y{1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0};
  const std::vector<double> s{0.9, 0.1, 0.4, 0.4, 0.4, 0.3, 0.8, 0.8, 0.2, 0.7,
                              0.05, 0.6, 0.65, 0.5, 0.1, 0.3, 0.9, 0.55, 0.0, 0.2};
  CHECK(auroc(y, s) == doctest::Approx(auroc_brute(y, s)).epsilon(1e-12));
  // Hand count: 6 positives above 4 negatives, one tie.
  CHECK(auroc(std::vector<double>{1, 1, 0, 0}, std::vector<double>{0.3, 0.8, 0.3, 0.1}) ==
        doctest::Approx(3.5 / 4.0));
  CHECK(auroc(std::vector<double>{1, 0}, std::vector<double>{0.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(auroc(std::vector<double>{1, 1}, std::vector<double>{0.1, 0.2}), DegenerateLabels);

  std::vector<double> truth(20);
  std::vector<double> pred(20);
  double sq = 0;
  for (int i = 0; i < 20; ++i) {
    truth[static_cast<std::size_t>(i)] = 0.3 * i - 2.0;
    pred[static_cast<std::size_t>(i)] = 0.28 * i - 1.5 + (i % 3 == 0 ? 0.2 : -0.1);
    const double d = truth[static_cast<std::size_t>(i)] - pred[static_cast<std::size_t>(i)];
    sq += d * d;
  }
  CHECK(rmse(truth, pred) == doctest::Approx(std::sqrt(sq / 20.0)).epsilon(1e-14));
  CHECK(rmse(truth, truth) == 0.0);
}

TEST_CASE("CSV ingestion") {
  const auto p = write_temp("chemlab_probe.csv",
                            "id,smiles,y\n"
                            "1,CCO,1.5\n"
                            "2,OCC,2.5\n"
                            "3,C(,0.1\n"
                            "4,\"CC(=O)O\",-1\n"
                            "5,CCN,\n"
                            "6,CCCl,nan\n");
  const auto ds = ingest_csv(p, "smiles", "y", TaskType::Regression, "demo");
  CHECK(ds.rows == 6);
  CHECK(ds.records.size() == 2);
  CHECK(ds.dropped_duplicate == 1);
  CHECK(ds.dropped_invalid == 1);
  CHECK(ds.dropped_target == 2);
  CHECK(ds.records[0].target == 1.5);
  CHECK_THROWS_AS(ingest_csv(p, "smiles", "logS", TaskType::Regression), MissingColumn);
  const auto empty = write_temp("chemlab_probe_empty.csv", "smiles,y\nC(,1\n");
  CHECK_THROWS_AS(ingest_csv(empty, "smiles", "y", TaskType::Regression), EmptyDataset);
  const auto bad = write_temp("chemlab_probe_bad.csv", "smiles,y\nCCO,2\n");
  CHECK_THROWS(ingest_csv(bad, "smiles", "y", TaskType::Classification));
  fs::remove(p);
  fs::remove(empty);
  fs::remove(bad);
  CHECK(split_csv_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
}

TEST_CASE("random splits partition the data") {
  const auto ds = unlabeled(97, TaskType::Regression);
  const auto folds = split(ds, SplitStrategy::Random, 5, 3);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    std::set<int> all;
    all.insert(f.train.begin(), f.train.end());
    all.insert(f.valid.begin(), f.valid.end());
    all.insert(f.test.begin(), f.test.end());
    CHECK(all.size() == 97);
    CHECK(f.train.size() + f.valid.size() + f.test.size() == 97);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 96);
  }
  CHECK(folds[0].test != folds[1].test);
}

TEST_CASE("scaffold splits") {
  SUBCASE("all scaffolds distinct") {
    const auto ds = dataset_of(linker_series(30));
    for (const auto& f : split(ds, SplitStrategy::Scaffold, 3, 1)) {
      CHECK(std::abs(static_cast<int>(f.train.size()) - 24) <= 1);
      CHECK(std::abs(static_cast<int>(f.valid.size()) - 3) <= 1);
      CHECK(std::abs(static_cast<int>(f.test.size()) - 3) <= 1);
    }
  }
  SUBCASE("one scaffold") {
    const auto ds = dataset_of({"Cc1ccccc1", "Oc1ccccc1", "Nc1ccccc1", "CCc1ccccc1", "Clc1ccccc1"});
    CHECK_THROWS_AS(split(ds, SplitStrategy::Scaffold, 2, 1), TooFewScaffolds);
  }
  SUBCASE("no scaffold crosses parts") {
    std::vector<std::string> smiles = linker_series(12);
    for (int k = 0; k < 12; ++k) {
      smiles.push_back("O" + smiles[static_cast<std::size_t>(k)]);
    }
    const auto ds = dataset_of(smiles);
    for (const auto& f : split(ds, SplitStrategy::Scaffold, 2, 5)) {
      std::set<std::string> train;
      for (const int i : f.train) {
        train.insert(mol::canonical_smiles(mol::murcko_scaffold(ds.records[static_cast<std::size_t>(i)].molecule)));
      }
      for (const int i : f.test) {
        CHECK_FALSE(train.contains(mol::canonical_smiles(mol::murcko_scaffold(ds.records[static_cast<std::size_t>(i)].molecule))));
      }
    }
  }
}

TEST_CASE("a linear target is fit exactly") {
  auto ds = unlabeled(200, TaskType::Regression);
  Eigen::MatrixXd x(200, 5);
  Rng rng(4);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = rng.normal();
  }
  const Eigen::VectorXd w = (Eigen::VectorXd(5) << 1.0, -2.0, 0.5, 0.0, 3.0).finished();
  const Eigen::VectorXd y = (x * w).array() + 7.0;
  for (int i = 0; i < 200; ++i) {
    ds.records[static_cast<std::size_t>(i)].target = y(i);
  }
  const auto r = fit_score(x, ds, split(ds, SplitStrategy::Random, 3, 1), {1e-10});
  CHECK(r.metric == "rmse");
  CHECK(r.predictor == "ridge");
  CHECK(r.mean < 1e-6);
  CHECK(r.fold_scores.size() == 3);
}

TEST_CASE("features unrelated to labels give chance AUROC") {
  const auto ds = ingest_csv(testing::data_dir() / "probe_classification.csv", "smiles", "label",
                             TaskType::Classification, "fixture");
  const auto x = featurize_random(ds, 17);
  CHECK(x.cols() == kBaselineWidth);
  CHECK(x == featurize_random(ds, 17));
  const auto r = fit_score(x, ds, split(ds, SplitStrategy::Random, 5, 2));
  CHECK(r.metric == "auroc");
  CHECK(std::abs(r.mean - 0.5) <= 0.1);
}

TEST_CASE("single-class folds are rejected") {
  auto ds = unlabeled(40, TaskType::Classification);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 3);
  CHECK_THROWS_AS(fit_score(x, ds, split(ds, SplitStrategy::Random, 2, 1)), DegenerateLabels);
}

TEST_CASE("descriptor featurizers") {
  const auto ds = dataset_of({"CCO", "c1ccccc1O", "N[C@@H](C)C(=O)O", "CC(=O)[O-]"});
  const auto e = featurize_ecfp(ds);
  CHECK(e.cols() == 2048);
  CHECK(e.row(0).sum() > 0);
  nn::ModelConfig c;
  const auto& v = testing::smiles_vocab();
  c.src_vocab = v.size();
  c.tgt_vocab = v.size();
  c.pad_id = v.pad();
  c.d_model = 16;
  c.d_ff = 32;
  c.n_layers = 1;
  c.n_heads = 2;
  c.dropout = 0.0;
  nn::Model<float> m(c, 3);
  CHECK(featurize_model(ds, m, v, nn::Pooling::Cat6, 1).cols() == 96);
  const auto mean = featurize_model(ds, m, v, nn::Pooling::Mean, 1);
  CHECK(mean == featurize_model(ds, m, v, nn::Pooling::Mean, 1));
  // Batch composition only changes the padding around each molecule.
  CHECK((mean - featurize_model(ds, m, v, nn::Pooling::Mean, 1, 2)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("summary CSV") {
  ProbeResult r;
  r.dataset = "bace";
  r.descriptor = "ecfp";
  r.metric = "auroc";
  r.mean = 0.8;
  r.sd = 0.05;
  std::ostringstream out;
  write_summary_csv(out, {r});
  CHECK(out.str().rfind("descriptor,checkpoint_step,dataset,metric,mean,sd\n", 0) == 0);
  CHECK(out.str().find("ecfp,") != std::string::npos);
}
