// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/cli/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "chemlab/diagnostics/curves.hpp"
#include "chemlab/diagnostics/evaluation.hpp"
#include "chemlab/fingerprints/agreement.hpp"
#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/validate.hpp"
#include "chemlab/probe/probe.hpp"
#include "chemlab/synth/generator.hpp"
#include "chemlab/transformer/checkpoint.hpp"

namespace chemlab::cli {

RunLock::RunLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw LockHeld("run directory " + dir.string() + " is locked by another process (" + path_.string() + ")");
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::string step_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%07ld", step);
  return buf;
}

std::vector<long> select_steps(const fs::path& run_dir, const std::vector<long>& wanted) {
  const auto saved = saved_checkpoints(run_dir);
  if (wanted.empty()) {
    return saved;
  }
  for (const long s : wanted) {
    if (!std::binary_search(saved.begin(), saved.end(), s)) {
      throw std::runtime_error("no checkpoint for step " + std::to_string(s) + " in " + run_dir.string());
    }
  }
  auto out = wanted;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

fs::path checkpoint_path(const fs::path& run_dir, long step) {
  return run_dir / "checkpoints" / (step_name(step) + ".ckpt");
}

std::vector<long> saved_checkpoints(const fs::path& run_dir) {
  std::vector<long> out;
  const auto dir = run_dir / "checkpoints";
  if (!fs::exists(dir)) {
    return out;
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    long step = 0;
    if (e.path().extension() == ".ckpt" && std::sscanf(name.c_str(), "step_%ld.ckpt", &step) == 1) {
      out.push_back(step);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_synth(const SynthOptions& opt) {
  synth::GeneratorConfig g;
  g.count = opt.count;
  g.max_heavy = opt.max_heavy;
  g.seed = opt.seed;
  std::ostringstream text;
  for (const auto& s : synth::generate_smiles(g)) {
    text << s << '\n';
  }
  if (opt.out.has_parent_path()) {
    fs::create_directories(opt.out.parent_path());
  }
  write_text(opt.out, text.str());
}

void cmd_preprocess(const RunConfig& cfg, const std::optional<fs::path>& out) {
  const auto dir = out.value_or(cfg.corpus.dir);
  if (cfg.corpus.inputs.empty()) {
    throw ConfigError("corpus.inputs is empty");
  }
  RunLock lock(dir);
  std::vector<std::string> raw;
  for (const auto& p : cfg.corpus.inputs) {
    const auto lines = train::read_lines(p.string());
    raw.insert(raw.end(), lines.begin(), lines.end());
  }
  const auto corpus = train::build_corpus(raw, cfg.corpus.plan, cfg.corpus.seed);

  std::ostringstream canonical;
  for (const auto& s : corpus.canonical) {
    canonical << s << '\n';
  }
  write_text(dir / "canonical.txt", canonical.str());
  train::write_pairs((dir / "train.tsv").string(), corpus.train);
  train::write_pairs((dir / "test.tsv").string(), corpus.test);

  // Per-length molecule and chiral-token counts of the training targets,
  // with running totals.
  std::map<int, std::array<long, 3>> by_length;
  long at_total = 0;
  long atat_total = 0;
  long chiral = 0;
  for (const auto& p : corpus.train) {
    const auto [at, atat] = train::chiral_token_counts(p.target);
    auto& row = by_length[train::stratum_length(p.target)];
    row[0] += 1;
    row[1] += at;
    row[2] += atat;
    at_total += at;
    atat_total += atat;
    chiral += at + atat > 0 ? 1 : 0;
  }
  std::ostringstream csv;
  csv << "length,molecules,at_tokens,atat_tokens,cumulative_molecules,cumulative_at,cumulative_atat\n";
  std::array<long, 3> cum{};
  for (const auto& [len, row] : by_length) {
    for (int k = 0; k < 3; ++k) {
      cum[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
    }
    csv << len << ',' << row[0] << ',' << row[1] << ',' << row[2] << ',' << cum[0] << ',' << cum[1] << ','
        << cum[2] << '\n';
  }
  write_text(dir / "length_report.csv", csv.str());

  nlohmann::json report = corpus.report;
  report["plan"] = cfg.corpus.plan;
  report["seed"] = cfg.corpus.seed;
  report["strata"] = by_length.size();
  report["at_tokens"] = at_total;
  report["atat_tokens"] = atat_total;
  report["chiral_fraction"] =
      corpus.train.empty() ? 0.0 : static_cast<double>(chiral) / static_cast<double>(corpus.train.size());
  write_text(dir / "report.json", report.dump(2) + "\n");
}

train::TrainSummary cmd_train(const RunConfig& cfg, const std::optional<fs::path>& out, bool resume) {
  if (!cfg.raw.contains("train")) {
    throw ConfigError("config has no train section");
  }
  const auto dir = out.value_or(cfg.run_dir);
  RunLock lock(dir);
  const auto src = tok::Vocabulary::load(cfg.source_vocab);
  const auto tgt = tok::Vocabulary::load(cfg.target_vocab);
  const auto train_pairs = train::read_pairs((cfg.corpus.dir / "train.tsv").string());
  const auto test_pairs = train::read_pairs((cfg.corpus.dir / "test.tsv").string());
  train::Trainer trainer(cfg.train, src, tgt, train::tokenize_pairs(train_pairs, src, tgt),
                         train::tokenize_pairs(test_pairs, src, tgt), dir);
  trainer.on_eval = [](const diag::MetricsRecord& r) {
    std::fprintf(stderr, "step %7ld  loss %.4f  perfect %.4f  partial %.4f  valid %.4f\n", r.step, r.loss,
                 r.perfect_accuracy, r.partial_accuracy, r.validity);
  };
  // Seeds, vocab paths and corpus location are part of the snapshot.
  write_text(dir / "run_config.json", cfg.raw.dump(2) + "\n");
  return trainer.run(resume);
}

void cmd_diagnose(const RunConfig& cfg, const std::optional<fs::path>& out) {
  const auto dir = out.value_or(cfg.run_dir / "diagnostics");
  RunLock lock(cfg.run_dir);
  fs::create_directories(dir / "agreement");
  const auto src_vocab = tok::Vocabulary::load(cfg.source_vocab);
  const auto tgt_vocab = tok::Vocabulary::load(cfg.target_vocab);
  const auto pairs_path = cfg.diagnose.pairs.empty() ? cfg.corpus.dir / "test.tsv" : cfg.diagnose.pairs;
  auto pairs = train::read_pairs(pairs_path.string());
  if (pairs.size() > static_cast<std::size_t>(cfg.diagnose.limit)) {
    pairs.resize(static_cast<std::size_t>(cfg.diagnose.limit));
  }
  const auto examples = train::tokenize_pairs(pairs, src_vocab, tgt_vocab);
  std::vector<diag::Sequence> sources;
  std::vector<diag::Sequence> targets;
  std::vector<mol::Molecule> target_mols;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    sources.push_back(examples[i].src);
    targets.push_back(examples[i].tgt);
    target_mols.push_back(mol::parse_smiles(pairs[i].target));
    longest = std::max(longest, examples[i].tgt.size());
  }

  const auto steps = select_steps(cfg.run_dir, cfg.diagnose.steps);
  if (steps.empty()) {
    throw std::runtime_error("no checkpoints under " + (cfg.run_dir / "checkpoints").string());
  }
  std::set<std::string> occurring;
  for (const auto& t : targets) {
    for (const int id : diag::scored_tokens(t, tgt_vocab)) {
      if (!tgt_vocab.is_special(id)) {
        occurring.insert(tgt_vocab.token(id));
      }
    }
  }

  std::ostringstream accuracy;
  std::ostringstream masked;
  std::ostringstream tf;
  std::ostringstream chirality;
  accuracy << "step,perfect_accuracy,partial_accuracy,validity\n";
  masked << "step";
  for (const auto& t : occurring) {
    masked << ',' << (t == "," ? "\",\"" : t);
  }
  masked << '\n';
  tf << "step,token,hits,total,accuracy,frequency\n";
  chirality << "step,correct,chiral_only,other,fraction_correct,fraction_chiral_only,fraction_other,at_for_atat,atat_for_at\n";
  std::vector<std::pair<long, std::vector<std::string>>> decoded;
  const std::vector<fp::FingerprintConfig> fps{{fp::FingerprintKind::Ecfp, 1}, {fp::FingerprintKind::Ecfp, 2},
                                               {fp::FingerprintKind::Ecfp, 3}, {fp::FingerprintKind::PathKeys}};
  for (const long step : steps) {
    auto model = nn::restore_model(nn::load_checkpoint(checkpoint_path(cfg.run_dir, step)));
    const int max_len = std::min(static_cast<int>(longest) + 8, model.config().max_len - 1);
    const auto preds = diag::greedy_predictions(model, sources, tgt_vocab, max_len);
    std::vector<std::string> strings;
    long valid = 0;
    for (const auto& p : preds) {
      strings.push_back(tok::detokenize(p, tgt_vocab));
      valid += mol::validate(strings.back()).valid() ? 1 : 0;
    }
    accuracy << step << ',' << diag::perfect_accuracy(preds, targets, tgt_vocab) << ','
             << diag::partial_accuracy(preds, targets, tgt_vocab) << ','
             << static_cast<double>(valid) / static_cast<double>(preds.size()) << '\n';
    const auto table = diag::masked_accuracy_table(preds, targets, tgt_vocab);
    masked << step;
    for (const auto& t : occurring) {
      masked << ',' << table.at(t);
    }
    masked << '\n';
    const auto tally = diag::charwise_tf_accuracy(model, sources, targets, tgt_vocab);
    long all = 0;
    for (const auto& [_, t] : tally) {
      all += t.total;
    }
    for (const auto& [token, t] : tally) {
      tf << step << ',' << (token == "," ? "\",\"" : token) << ',' << t.hits << ',' << t.total << ','
         << t.accuracy() << ',' << static_cast<double>(t.total) / static_cast<double>(all) << '\n';
    }
    const auto c = diag::chirality_classification(preds, targets, tgt_vocab);
    chirality << step << ',' << c.correct << ',' << c.chiral_only << ',' << c.other << ',' << c.fraction_correct()
              << ',' << c.fraction_chiral_only() << ',' << c.fraction_other() << ',' << c.at_for_atat << ','
              << c.atat_for_at << '\n';
    std::vector<std::pair<std::string, mol::Molecule>> agreement_pairs;
    for (std::size_t i = 0; i < strings.size(); ++i) {
      agreement_pairs.emplace_back(strings[i], target_mols[i]);
    }
    for (const auto& f : {fps[1], fps[3]}) {
      std::ofstream a(dir / "agreement" / (step_name(step) + "_" + f.name() + ".csv"));
      fp::dimension_agreement(agreement_pairs, f).write_csv(a);
    }
    decoded.emplace_back(step, std::move(strings));
  }
  write_text(dir / "accuracy.csv", accuracy.str());
  write_text(dir / "masked_accuracy.csv", masked.str());
  write_text(dir / "teacher_forced.csv", tf.str());
  write_text(dir / "chirality.csv", chirality.str());
  const auto curve = diag::similarity_curve(decoded, target_mols, fps);
  std::ostringstream sim;
  curve.write_csv(sim);
  write_text(dir / "similarity.csv", sim.str());

  nlohmann::json thresholds = {{"molecules", pairs.size()},
                               {"similarity_defined", curve.defined()},
                               {"similarity_omitted", curve.omitted}};
  const auto metrics = cfg.run_dir / "metrics.jsonl";
  if (fs::exists(metrics)) {
    const auto records = diag::read_metrics(metrics.string());
    for (const double t : {0.5, 0.7, 0.95}) {
      const auto s = diag::step_threshold(records, t);
      thresholds["step_" + train::threshold_label(t)] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
    }
  }
  write_text(dir / "thresholds.json", thresholds.dump(2) + "\n");
}

void cmd_probe(const RunConfig& cfg, const std::optional<fs::path>& out) {
  if (cfg.probe.datasets.empty()) {
    throw ConfigError("probe.datasets is empty");
  }
  const auto dir = out.value_or(cfg.run_dir / "probe");
  fs::create_directories(dir);
  const bool have_run = fs::exists(cfg.run_dir / "checkpoints");
  std::optional<RunLock> lock;
  std::vector<long> steps;
  if (have_run) {
    lock.emplace(cfg.run_dir);
    steps = select_steps(cfg.run_dir, cfg.probe.steps);
  }
  const auto src_vocab = tok::Vocabulary::load(cfg.source_vocab);
  std::vector<probe::ProbeResult> all;
  for (const auto& spec : cfg.probe.datasets) {
    const auto ds = probe::ingest_csv(spec.path, spec.smiles_column, spec.target_column, spec.task, spec.name);
    const auto folds = probe::split(ds, spec.split, cfg.probe.folds, cfg.probe.seed);
    const auto ds_dir = dir / ds.name;
    fs::create_directories(ds_dir);
    const auto emit = [&](probe::ProbeResult r, const std::string& descriptor, long step) {
      r.descriptor = descriptor;
      r.checkpoint_step = step;
      nlohmann::json j = r;
      j["split"] = to_string(spec.split);
      j["records"] = ds.records.size();
      j["dropped_invalid"] = ds.dropped_invalid;
      j["dropped_duplicate"] = ds.dropped_duplicate;
      write_text(ds_dir / (descriptor + ".json"), j.dump(2) + "\n");
      all.push_back(std::move(r));
    };
    for (const auto& b : cfg.probe.baselines) {
      const auto x = b == "ecfp" ? probe::featurize_ecfp(ds) : probe::featurize_random(ds, cfg.probe.seed);
      emit(probe::fit_score(x, ds, folds), b, -1);
    }
    for (const long step : steps) {
      auto model = nn::restore_model(nn::load_checkpoint(checkpoint_path(cfg.run_dir, step)));
      for (const auto pooling : cfg.probe.poolings) {
        const auto x = probe::featurize_model(ds, model, src_vocab, pooling, cfg.probe.seed);
        emit(probe::fit_score(x, ds, folds), step_name(step) + "_" + std::string(nn::to_string(pooling)), step);
      }
    }
  }
  std::ostringstream csv;
  probe::write_summary_csv(csv, all);
  write_text(dir / "summary.csv", csv.str());
}

std::string cmd_report(const RunConfig& cfg) {
  const auto records = diag::read_metrics((cfg.run_dir / "metrics.jsonl").string());
  std::ostringstream text;
  text << "run " << cfg.run_dir.string() << '\n';
  text << "      step   perfect   partial  validity     ecfp2      loss\n";
  for (const auto& r : records) {
    char line[160];
    const double ecfp2 = r.tanimoto.count("ecfp2") ? r.tanimoto.at("ecfp2") : 0.0;
    std::snprintf(line, sizeof line, "%10ld  %8.4f  %8.4f  %8.4f  %8.4f  %8.4f\n", r.step, r.perfect_accuracy,
                  r.partial_accuracy, r.validity, ecfp2, r.loss);
    text << line;
  }
  nlohmann::json j = {{"records", records.size()}};
  for (const double t : cfg.train.snapshot_thresholds) {
    const auto s = diag::step_threshold(records, t);
    j["step_" + train::threshold_label(t)] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
    text << "step-" << train::threshold_label(t) << ": " << (s ? std::to_string(*s) : "not reached") << '\n';
  }
  if (!records.empty()) {
    j["final"] = records.back();
  }
  write_text(cfg.run_dir / "report.json", j.dump(2) + "\n");
  return text.str();
}

}  // namespace chemlab::cli
