// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks, one per numbered criterion. Each prints a single
// PASS/FAIL line; the exit status is nonzero when any selected check fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "chemlab/cli/commands.hpp"
#include "chemlab/cli/config.hpp"
#include "chemlab/diagnostics/curves.hpp"
#include "chemlab/diagnostics/stats.hpp"
#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/validate.hpp"
#include "chemlab/probe/probe.hpp"
#include "chemlab/synth/generator.hpp"
#include "chemlab/tokenizer/vocabulary.hpp"
#include "chemlab/training/corpus.hpp"
#include "chemlab/util/alloc.hpp"
#include "gradcheck.hpp"
#include "metric_cases.hpp"
#include "test_support.hpp"

using namespace chemlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

fs::path source_dir() { return CHEMLAB_SOURCE_DIR; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Criterion 1: canonical(parse(randomized(m))) == canonical(m).
Outcome stereo_round_trip() {
  synth::GeneratorConfig g;
  g.count = 1400;
  g.max_heavy = 20;
  g.seed = 2026;
  train::SamplingPlan plan;
  plan.max_heavy_atoms = 20;
  const auto corpus = train::build_corpus(synth::generate_smiles(g), plan, 1);
  const auto& mols = corpus.canonical;
  long checked = 0;
  long failed = 0;
  long stereo = 0;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    const auto m = mol::parse_smiles(mols[i]);
    stereo += mols[i].find('@') != std::string::npos || mols[i].find('/') != std::string::npos ? 1 : 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = mol::randomized_smiles(m, derive_seed(seed, i));
      failed += mol::canonical_smiles(mol::parse_smiles(r)) == mols[i] ? 0 : 1;
      ++checked;
    }
  }
  return {mols.size() >= 1000 && failed == 0,
          std::to_string(mols.size()) + " molecules (" + std::to_string(stereo) + " with stereo) x 10 seeds, " +
              std::to_string(failed) + "/" + std::to_string(checked) + " mismatches"};
}

// Criterion 2: exhaustive atom orderings of the small fixture.
Outcome canonical_oracle() {
  long orderings = 0;
  long failed = 0;
  int molecules = 0;
  for (const auto& s : testing::small_fixture()) {
    const auto m = mol::parse_smiles(s);
    if (m.atom_count() > 8) {
      continue;
    }
    ++molecules;
    const auto ref = mol::canonical_smiles(m);
    std::vector<int> order(static_cast<std::size_t>(m.atom_count()));
    std::iota(order.begin(), order.end(), 0);
    do {
      failed += mol::canonical_smiles(testing::renumbered(m, order)) == ref ? 0 : 1;
      ++orderings;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  const std::vector<std::pair<std::string, std::string>> mirror{
      {"N[C@@H](C)C(=O)O", "N[C@H](C)C(=O)O"},
      {"[C@H](F)(Cl)Br", "[C@@H](F)(Cl)Br"},
      {"F/C=C/F", "F/C=C\\F"},
      {"C[C@@H](O)[C@H](C)O", "C[C@@H](O)[C@@H](C)O"}};
  int separated = 0;
  for (const auto& [a, b] : mirror) {
    separated += mol::canonical_smiles(mol::parse_smiles(a)) != mol::canonical_smiles(mol::parse_smiles(b)) ? 1 : 0;
  }
  return {failed == 0 && separated == static_cast<int>(mirror.size()),
          std::to_string(molecules) + " molecules, " + std::to_string(orderings) + " orderings, " +
              std::to_string(failed) + " disagreements; " + std::to_string(separated) + "/" +
              std::to_string(mirror.size()) + " stereoisomer pairs separated"};
}

// Criterion 3: hand-labelled validity fixture.
Outcome validity_gate() {
  int total = 0;
  int right = 0;
  std::string wrong;
  for (const auto& [smiles, expected] : testing::read_labelled(testing::data_dir() / "validity.tsv")) {
    ++total;
    const auto got = std::string(mol::to_string(mol::validate(smiles).reason));
    if (got == expected) {
      ++right;
    } else {
      wrong += " " + smiles + "(" + got + ")";
    }
  }
  return {total == 50 && right == 50, std::to_string(right) + "/" + std::to_string(total) + " classified" + wrong};
}

// Criterion 4: reverse-mode gradients against central differences.
Outcome gradient_check() {
  double worst = 0.0;
  std::string worst_at;
  int checked = 0;
  std::set<std::string> kinds;
  for (const auto norm : {nn::NormPlacement::PostLN, nn::NormPlacement::PreLN}) {
    nn::Model<double> m(testing::tiny_config(16, norm), 21);
    testing::jitter(m, 5);
    const auto batch = testing::tiny_batch(m.config(), 6, 4);
    for (const auto& [kind, samples] : testing::gradient_check(m, batch, 20, 7)) {
      kinds.insert(kind);
      for (const auto& s : samples) {
        ++checked;
        if (s.relative_error() > worst) {
          worst = s.relative_error();
          worst_at = s.parameter;
        }
      }
    }
  }
  return {worst < 1e-4 && checked >= 20 * static_cast<int>(kinds.size()),
          std::to_string(checked) + " parameters over " + std::to_string(kinds.size()) +
              " layer kinds, both norm placements; max relative error " + fmt("%.2e", worst) + " at " + worst_at};
}

// Criterion 5: metric algebra over random prediction/target sets.
Outcome metric_algebra() {
  const auto& v = testing::smiles_vocab();
  Rng rng(55);
  long violations = 0;
  long masked_checks = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing::random_metric_case(v, rng);
    const double perfect = diag::perfect_accuracy(c.preds, c.targets, v);
    violations += perfect <= diag::partial_accuracy(c.preds, c.targets, v) ? 0 : 1;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing::random_metric_case(v, rng);
    const double perfect = diag::perfect_accuracy(c.preds, c.targets, v);
    for (int id = 0; id < v.size(); ++id) {
      if (!v.is_special(id)) {
        violations += diag::masked_perfect_accuracy(c.preds, c.targets, id, v) >= perfect ? 0 : 1;
        ++masked_checks;
      }
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing::random_metric_case(v, rng);
    const auto b = diag::chirality_classification(c.preds, c.targets, v);
    const double sum = b.fraction_correct() + b.fraction_chiral_only() + b.fraction_other();
    violations += std::abs(sum - 1.0) <= 1e-12 ? 0 : 1;
  }
  return {violations == 0, "3 x 1000 random cases (" + std::to_string(masked_checks) + " masked-token checks), " +
                               std::to_string(violations) + " violations"};
}

// Produces (or resumes) the desk run described by configs/desk.json.
diag::MetricsCurve desk_curve() {
  const auto cfg = cli::load_config(source_dir() / "configs" / "desk.json");
  if (!fs::exists(cfg.corpus.inputs.front())) {
    cli::SynthOptions s;
    s.count = 80000;
    s.max_heavy = 20;
    s.seed = 1;
    s.out = cfg.corpus.inputs.front();
    cli::cmd_synth(s);
  }
  if (!fs::exists(cfg.corpus.dir / "train.tsv")) {
    cli::cmd_preprocess(cfg, std::nullopt);
  }
  cli::cmd_train(cfg, std::nullopt, true);
  return diag::read_metrics((cfg.run_dir / "metrics.jsonl").string());
}

// Criterion 6: partial structures before whole molecules.
Outcome partial_before_perfect() {
  const auto curve = desk_curve();
  const diag::MetricsRecord* hit = nullptr;
  const diag::MetricsRecord* best = nullptr;
  const auto score = [](const diag::MetricsRecord& r) {
    return std::min(r.partial_accuracy / 0.95, r.tanimoto.at("ecfp2") / 0.85);
  };
  for (const auto& r : curve) {
    if (r.perfect_accuracy > 0.6) {
      continue;
    }
    if (best == nullptr || score(r) > score(*best)) {
      best = &r;
    }
    if (hit == nullptr && r.partial_accuracy >= 0.95 && r.tanimoto.at("ecfp2") >= 0.85) {
      hit = &r;
    }
  }
  const auto* shown = hit != nullptr ? hit : best;
  std::string detail = std::to_string(curve.size()) + " evaluations up to step " +
                       (curve.empty() ? std::string("-") : std::to_string(curve.back().step));
  if (shown != nullptr) {
    detail += "; " + std::string(hit != nullptr ? "first qualifying" : "closest") + " step " +
              std::to_string(shown->step) + ": partial " + fmt("%.3f", shown->partial_accuracy) + ", ecfp2 " +
              fmt("%.3f", shown->tanimoto.at("ecfp2")) + ", perfect " + fmt("%.3f", shown->perfect_accuracy);
  }
  return {hit != nullptr, detail};
}

// Criterion 7: chiral markers lag behind the other tokens.
Outcome chiral_lag() {
  const auto curve = desk_curve();
  const auto& v = testing::smiles_vocab();
  for (const auto& r : curve) {
    if (r.perfect_accuracy < 0.5) {
      continue;
    }
    std::vector<double> acc;
    for (const auto& [token, tally] : r.teacher_forced) {
      const auto id = v.id(token);
      if (id && !v.is_special(*id) && tally.total > 0) {
        acc.push_back(tally.accuracy());
      }
    }
    std::sort(acc.begin(), acc.end());
    const std::size_t n = acc.size();
    const double median = n == 0 ? 0.0 : n % 2 == 1 ? acc[n / 2] : 0.5 * (acc[n / 2 - 1] + acc[n / 2]);
    const auto tf = [&](const char* t) {
      const auto it = r.teacher_forced.find(t);
      return it == r.teacher_forced.end() ? -1.0 : it->second.accuracy();
    };
    const double at = tf("@");
    const double atat = tf("@@");
    return {at >= 0 && atat >= 0 && at < median && atat < median,
            "step " + std::to_string(r.step) + " (perfect " + fmt("%.3f", r.perfect_accuracy) + "): '@' " +
                fmt("%.3f", at) + ", '@@' " + fmt("%.3f", atat) + ", median over " + std::to_string(n) +
                " tokens " + fmt("%.3f", median)};
  }
  double peak = 0.0;
  for (const auto& r : curve) {
    peak = std::max(peak, r.perfect_accuracy);
  }
  return {false, "perfect accuracy never reached 0.5 (peak " + fmt("%.3f", peak) + " by step " +
                     (curve.empty() ? std::string("-") : std::to_string(curve.back().step)) + ")"};
}

// Criterion 8: step-0.5 for pre-LN against post-LN over three seeds.
Outcome pre_ln_direction() {
  auto cfg = cli::load_config(source_dir() / "configs" / "ln_compare.json");
  if (!fs::exists(cfg.corpus.inputs.front())) {
    cli::SynthOptions s;
    s.count = 120000;
    s.max_heavy = 12;
    s.seed = 3;
    s.out = cfg.corpus.inputs.front();
    cli::cmd_synth(s);
  }
  if (!fs::exists(cfg.corpus.dir / "train.tsv")) {
    cli::cmd_preprocess(cfg, std::nullopt);
  }
  const fs::path base = cfg.run_dir;
  std::map<std::string, std::vector<double>> steps;
  for (const auto norm : {nn::NormPlacement::PreLN, nn::NormPlacement::PostLN}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto run = cfg;
      run.train.model.norm = norm;
      run.train.seed = seed;
      run.run_dir = base / (std::string(nn::to_string(norm)) + "_seed" + std::to_string(seed));
      cli::cmd_train(run, std::nullopt, true);
      const auto curve = diag::read_metrics((run.run_dir / "metrics.jsonl").string());
      const auto s = diag::step_threshold(curve, 0.5);
      steps[std::string(nn::to_string(norm))].push_back(
          static_cast<double>(s.value_or(run.train.optimizer.max_steps)));
    }
  }
  const auto& pre = steps.at("pre_ln");
  const auto& post = steps.at("post_ln");
  std::string detail = "step-0.5 pre_ln {";
  for (const double s : pre) {
    detail += " " + fmt("%.0f", s);
  }
  detail += " } post_ln {";
  for (const double s : post) {
    detail += " " + fmt("%.0f", s);
  }
  detail += " }; means " + fmt("%.0f", diag::mean(pre)) + " vs " + fmt("%.0f", diag::mean(post));
  try {
    const auto w = diag::welch_t_test(pre, post);
    detail += "; Welch t " + fmt("%.3f", w.t) + ", dof " + fmt("%.2f", w.dof) + ", p " + fmt("%.4f", w.p) +
              (w.p < 0.05 ? " (significant)" : " (not significant)");
  } catch (const diag::DegenerateSample& e) {
    detail += "; Welch test undefined (" + std::string(e.what()) + ")";
  }
  return {diag::mean(pre) <= diag::mean(post), detail};
}

// Criterion 9: random descriptors sit at chance; untrained pooled memory beats them.
Outcome probe_sanity() {
  const auto cfg = cli::load_config(source_dir() / "configs" / "desk.json");
  const auto ds = probe::ingest_csv(testing::data_dir() / "probe_classification.csv", "smiles", "label",
                                    probe::TaskType::Classification, "fixture_cls");
  const auto folds = probe::split(ds, probe::SplitStrategy::Scaffold, 5, 1);
  // One random draw scores with a spread of about 0.04, so the baseline
  // averages five independent draws.
  std::vector<double> draws;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    draws.push_back(probe::fit_score(probe::featurize_random(ds, s), ds, folds).mean);
  }
  const double random = diag::mean(draws);
  const auto vocab = tok::Vocabulary::load(cfg.source_vocab);
  nn::Model<float> model(cfg.train.model, cfg.train.effective_init_seed());
  const auto untrained =
      probe::fit_score(probe::featurize_model(ds, model, vocab, nn::Pooling::Mean, 1), ds, folds);
  const bool ok = random >= 0.4 && random <= 0.6 && untrained.mean - random >= 0.1;
  return {ok, std::to_string(ds.records.size()) + " molecules, 5 scaffold folds: random AUROC " +
                  fmt("%.3f", random) + " (5 draws, range " + fmt("%.3f", *std::min_element(draws.begin(), draws.end())) +
                  ".." + fmt("%.3f", *std::max_element(draws.begin(), draws.end())) + "), step-0 mean pooling " +
                  fmt("%.3f", untrained.mean) + " +/- " + fmt("%.3f", untrained.sd)};
}

// Criterion 10: two separate executions of the same run config.
Outcome determinism(const std::string& lab) {
  const fs::path root = fs::temp_directory_path() / "chemlab_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto vocab = (source_dir() / "data" / "vocab" / "smiles.txt").string();
  {
    std::ofstream out(root / "run.json");
    out << "{\"vocab\": {\"source\": \"" << vocab << "\", \"target\": \"" << vocab << "\"},\n"
        << " \"corpus\": {\"inputs\": [\"raw.smi\"], \"dir\": \"corpus\", \"seed\": 4,\n"
        << "            \"plan\": {\"strategy\": \"chirality_enriched\", \"test_fraction\": 0.1,"
        << " \"max_heavy_atoms\": 12}},\n"
        << " \"run_dir\": \"run\",\n"
        << " \"train\": {\"model\": {\"d_model\": 32, \"d_ff\": 64, \"n_layers\": 1, \"n_heads\": 2,"
        << " \"dropout\": 0.1},\n"
        << "           \"optimizer\": {\"warmup_steps\": 40, \"max_steps\": 120, \"accumulation\": 2,"
        << " \"token_budget\": 1024},\n"
        << "           \"seed\": 9, \"eval_interval\": 40, \"validation_size\": 48}}\n";
  }
  const auto sh = [&](const std::string& args) {
    const std::string cmd = "\"" + lab + "\" " + args + " > \"" + (root / "log.txt").string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  const auto cfg = (root / "run.json").string();
  const int rc = sh("synth --count 1500 --max-heavy 12 --seed 5 --out \"" + (root / "raw.smi").string() + "\"") |
                 sh("preprocess --config \"" + cfg + "\"") |
                 sh("train --config \"" + cfg + "\" --out \"" + (root / "a").string() + "\"") |
                 sh("train --config \"" + cfg + "\" --out \"" + (root / "b").string() + "\"");
  const auto a = slurp(root / "a" / "metrics.jsonl");
  const auto b = slurp(root / "b" / "metrics.jsonl");
  const long lines = std::count(a.begin(), a.end(), '\n');
  fs::remove_all(root);
  return {rc == 0 && !a.empty() && a == b,
          "two processes, " + std::to_string(lines) + " records each, " + std::to_string(a.size()) + " bytes: " +
              (a == b ? "identical" : "different") + (rc == 0 ? "" : " (a command failed)")};
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"chemlab acceptance checks"};
  std::vector<int> selected;
  std::string lab;
  app.add_option("-c,--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--lab", lab, "path to the lab executable")->default_val(CHEMLAB_LAB_PATH);
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"stereo round trip", stereo_round_trip}},
      {2, {"canonicalization oracle", canonical_oracle}},
      {3, {"validity gate", validity_gate}},
      {4, {"gradient correctness", gradient_check}},
      {5, {"metric algebra", metric_algebra}},
      {6, {"partial structures before whole molecules", partial_before_perfect}},
      {7, {"chiral tokens lag", chiral_lag}},
      {8, {"pre-LN direction", pre_ln_direction}},
      {9, {"probe sanity", probe_sanity}},
      {10, {"determinism", [&] { return determinism(lab); }}},
  };
  if (selected.empty()) {
    for (const auto& [n, c] : criteria) {
      selected.push_back(n);
    }
  }
  int failures = 0;
  for (const int n : selected) {
    const auto& [name, check] = criteria.at(n);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
