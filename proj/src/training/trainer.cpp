// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "chemlab/diagnostics/evaluation.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/validate.hpp"
#include "chemlab/tokenizer/bucketing.hpp"
#include "chemlab/transformer/checkpoint.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::train {

namespace fs = std::filesystem;

std::vector<Example> tokenize_pairs(const std::vector<Pair>& pairs, const tok::Vocabulary& src_vocab,
                                    const tok::Vocabulary& tgt_vocab) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({tok::tokenize(p.source, src_vocab, tok::SequenceKind::Source).ids,
                   tok::tokenize(p.target, tgt_vocab, tok::SequenceKind::Target).ids});
  }
  return out;
}

std::uint64_t TrainConfig::effective_init_seed() const noexcept {
  return init_seed != 0 ? init_seed : derive_seed(seed, 0x1417);
}

std::uint64_t TrainConfig::effective_order_seed() const noexcept {
  return order_seed != 0 ? order_seed : derive_seed(seed, 0x0bde);
}

void TrainConfig::validate() const {
  model.validate();
  optimizer.validate();
  if (eval_interval < 1 || validation_size < 1 || bucket_width < 1 || eval_batch_rows < 1) {
    throw std::invalid_argument("eval_interval, validation_size, bucket_width and eval_batch_rows must be positive");
  }
  for (const double t : snapshot_thresholds) {
    if (t < 0.0 || t > 1.0) {
      throw std::invalid_argument("snapshot thresholds must lie in [0, 1]");
    }
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"model", c.model},
       {"optimizer", c.optimizer},
       {"seed", c.seed},
       {"init_seed", c.init_seed},
       {"order_seed", c.order_seed},
       {"eval_interval", c.eval_interval},
       {"validation_size", c.validation_size},
       {"bucket_width", c.bucket_width},
       {"eval_batch_rows", c.eval_batch_rows},
       {"snapshot_thresholds", c.snapshot_thresholds},
       {"snapshot_steps", c.snapshot_steps}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.model = j.at("model").get<nn::ModelConfig>();
  c.optimizer = j.value("optimizer", nlohmann::json::object()).get<OptimizerConfig>();
  c.seed = j.value("seed", d.seed);
  c.init_seed = j.value("init_seed", d.init_seed);
  c.order_seed = j.value("order_seed", d.order_seed);
  c.eval_interval = j.value("eval_interval", d.eval_interval);
  c.validation_size = j.value("validation_size", d.validation_size);
  c.bucket_width = j.value("bucket_width", d.bucket_width);
  c.eval_batch_rows = j.value("eval_batch_rows", d.eval_batch_rows);
  c.snapshot_thresholds = j.value("snapshot_thresholds", d.snapshot_thresholds);
  c.snapshot_steps = j.value("snapshot_steps", d.snapshot_steps);
  c.validate();
}

void to_json(nlohmann::json& j, const TrainSummary& s) {
  j = {{"steps", s.steps},
       {"epochs", s.epochs},
       {"early_stopped", s.early_stopped},
       {"threshold_steps", s.threshold_steps},
       {"checkpoints", s.checkpoints}};
}

std::string threshold_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

namespace {

std::string step_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%07ld", step);
  return buf;
}

std::vector<diag::Sequence> column(const std::vector<Example>& xs, bool src, std::size_t n) {
  std::vector<diag::Sequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(src ? xs[i].src : xs[i].tgt);
  }
  return out;
}

std::vector<nn::NamedTensor> named(const std::vector<nn::Parameter<float>>& params,
                                   const std::vector<nn::Mat<float>>& values) {
  std::vector<nn::NamedTensor> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back({params[i].name, values[i]});
  }
  return out;
}

}  // namespace

struct Trainer::State {
  long step = 0;
  long epoch = 0;
  std::size_t batch_pos = 0;
  long batch_counter = 0;
  std::vector<tok::Batch> batches;
  std::set<std::string> reached;
};

Trainer::Trainer(TrainConfig cfg, const tok::Vocabulary& src_vocab, const tok::Vocabulary& tgt_vocab,
                 std::vector<Example> train, std::vector<Example> valid, fs::path run_dir)
    : cfg_(std::move(cfg)),
      src_vocab_(src_vocab),
      tgt_vocab_(tgt_vocab),
      train_(std::move(train)),
      valid_(std::move(valid)),
      dir_(std::move(run_dir)),
      state_(std::make_unique<State>()) {
  cfg_.validate();
  if (train_.empty() || valid_.empty()) {
    throw std::invalid_argument("training and validation sets must be non-empty");
  }
  if (cfg_.model.pad_id != tgt_vocab_.pad() || cfg_.model.pad_id != src_vocab_.pad()) {
    throw std::invalid_argument("model pad_id must match both vocabularies");
  }
  if (static_cast<std::size_t>(cfg_.validation_size) < valid_.size()) {
    valid_.resize(static_cast<std::size_t>(cfg_.validation_size));
  }
  for (const auto& e : valid_) {
    valid_targets_.push_back(mol::parse_smiles(tok::detokenize(e.tgt, tgt_vocab_)));
  }
  model_ = std::make_unique<nn::Model<float>>(cfg_.model, cfg_.effective_init_seed());
  adam_ = std::make_unique<Adam<float>>(cfg_.optimizer, model_->parameters());
}

Trainer::~Trainer() = default;

diag::MetricsRecord Trainer::evaluate(long step, double train_loss) {
  const auto n = valid_.size();
  const auto src = column(valid_, true, n);
  const auto tgt = column(valid_, false, n);
  std::size_t longest = 0;
  for (const auto& t : tgt) {
    longest = std::max(longest, t.size());
  }
  const int max_len = std::min(static_cast<int>(longest) + 8, cfg_.model.max_len - 1);

  diag::MetricsRecord r;
  r.step = step;
  r.train_loss = train_loss;
  r.learning_rate = step > 0 ? noam_lr(step, cfg_.model.d_model, cfg_.optimizer.warmup_steps) *
                                   cfg_.optimizer.lr_scale
                             : 0.0;

  double loss_sum = 0;
  long loss_tokens = 0;
  const int pad = cfg_.model.pad_id;
  const auto rows = static_cast<std::size_t>(cfg_.eval_batch_rows);
  for (std::size_t i = 0; i < n; i += rows) {
    const auto end = std::min(n, i + rows);
    std::vector<diag::Sequence> s(src.begin() + static_cast<std::ptrdiff_t>(i),
                                  src.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<diag::Sequence> t(tgt.begin() + static_cast<std::ptrdiff_t>(i),
                                  tgt.begin() + static_cast<std::ptrdiff_t>(end));
    long tokens = 0;
    for (const auto& seq : t) {
      tokens += static_cast<long>(seq.size()) - 1;
    }
    nn::Tape<float> tape(false);
    const auto l = model_->loss(tape, nn::TokenBatch::pack(s, pad), nn::TokenBatch::pack(t, pad), nullptr);
    loss_sum += static_cast<double>(tape.value(l)(0, 0)) * static_cast<double>(tokens);
    loss_tokens += tokens;
  }
  r.loss = loss_sum / static_cast<double>(loss_tokens);

  const auto preds = diag::greedy_predictions(*model_, src, tgt_vocab_, max_len, cfg_.eval_batch_rows);
  r.perfect_accuracy = diag::perfect_accuracy(preds, tgt, tgt_vocab_);
  r.partial_accuracy = diag::partial_accuracy(preds, tgt, tgt_vocab_);
  r.masked_accuracy = diag::masked_accuracy_table(preds, tgt, tgt_vocab_);
  r.chirality = diag::chirality_classification(preds, tgt, tgt_vocab_);
  r.teacher_forced = diag::charwise_tf_accuracy(*model_, src, tgt, tgt_vocab_, cfg_.eval_batch_rows);

  std::vector<std::string> strings;
  long valid = 0;
  for (const auto& p : preds) {
    strings.push_back(tok::detokenize(p, tgt_vocab_));
    valid += mol::validate(strings.back()).valid() ? 1 : 0;
  }
  r.validity = static_cast<double>(valid) / static_cast<double>(n);
  for (const auto& fcfg : {fp::FingerprintConfig{fp::FingerprintKind::Ecfp, 1},
                           fp::FingerprintConfig{fp::FingerprintKind::Ecfp, 2},
                           fp::FingerprintConfig{fp::FingerprintKind::Ecfp, 3},
                           fp::FingerprintConfig{fp::FingerprintKind::PathKeys}}) {
    if (const auto t = diag::mean_tanimoto(strings, valid_targets_, fcfg)) {
      r.tanimoto[fcfg.name()] = *t;
    }
  }
  record(r, strings);
  return r;
}

void Trainer::record(const diag::MetricsRecord& r, const std::vector<std::string>& predictions) {
  curve_.push_back(r);
  if (on_eval) {
    on_eval(r);
  }
  if (dir_.empty()) {
    return;
  }
  std::ofstream metrics(dir_ / "metrics.jsonl", std::ios::app);
  metrics << nlohmann::json(r).dump() << '\n';
  std::ofstream out(dir_ / "predictions" / (step_name(r.step) + ".txt"));
  for (const auto& p : predictions) {
    out << p << '\n';
  }
}

void Trainer::save(const fs::path& path) const {
  auto ckpt = nn::snapshot(*model_);
  const auto& params = model_->parameters();
  ckpt.first_moment = named(params, adam_->first_moment());
  ckpt.second_moment = named(params, adam_->second_moment());
  ckpt.step = state_->step;
  ckpt.meta = {{"epoch", state_->epoch},
               {"batch_pos", state_->batch_pos},
               {"batch_counter", state_->batch_counter},
               {"reached", state_->reached},
               {"summary", summary_},
               {"train", cfg_},
               {"optimizer_recipe",
                {{"beta1", cfg_.optimizer.beta1}, {"beta2", cfg_.optimizer.beta2}, {"eps", cfg_.optimizer.eps}}}};
  nn::save_checkpoint(path, ckpt);
}

void Trainer::load_latest() {
  const auto ckpt = nn::load_checkpoint(dir_ / "latest.ckpt");
  auto restored = nn::restore_model(ckpt);
  auto& params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].value = restored.parameters()[i].value;
    adam_->first_moment()[i] = ckpt.first_moment.at(i).value;
    adam_->second_moment()[i] = ckpt.second_moment.at(i).value;
  }
  adam_->set_steps(ckpt.step);
  state_->step = ckpt.step;
  state_->epoch = ckpt.meta.at("epoch").get<long>();
  state_->batch_pos = ckpt.meta.at("batch_pos").get<std::size_t>();
  state_->batch_counter = ckpt.meta.at("batch_counter").get<long>();
  state_->reached = ckpt.meta.at("reached").get<std::set<std::string>>();
  const auto& s = ckpt.meta.at("summary");
  summary_.steps = s.at("steps").get<long>();
  summary_.epochs = s.at("epochs").get<long>();
  summary_.early_stopped = s.at("early_stopped").get<bool>();
  summary_.threshold_steps = s.at("threshold_steps").get<std::map<std::string, long>>();
  summary_.checkpoints = s.at("checkpoints").get<std::vector<long>>();

  // Drop records written after the checkpoint so the file matches an
  // uninterrupted run.
  curve_.clear();
  const auto path = dir_ / "metrics.jsonl";
  for (const auto& r : diag::read_metrics(path.string())) {
    if (r.step <= ckpt.step) {
      curve_.push_back(r);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& r : curve_) {
    out << nlohmann::json(r).dump() << '\n';
  }
}

void Trainer::write_summary() const {
  if (dir_.empty()) {
    return;
  }
  nlohmann::json j = summary_;
  j["parameters"] = model_->parameter_count();
  j["train_pairs"] = train_.size();
  j["validation_pairs"] = valid_.size();
  if (!curve_.empty()) {
    j["final_perfect_accuracy"] = curve_.back().perfect_accuracy;
  }
  std::ofstream(dir_ / "summary.json") << j.dump(2) << '\n';
}

TrainSummary Trainer::run(bool resume) {
  auto& st = *state_;
  if (!dir_.empty()) {
    fs::create_directories(dir_ / "checkpoints");
    fs::create_directories(dir_ / "predictions");
  }
  const bool resuming = resume && !dir_.empty() && fs::exists(dir_ / "latest.ckpt");
  if (resuming) {
    load_latest();
  } else if (!dir_.empty()) {
    std::ofstream(dir_ / "metrics.jsonl", std::ios::trunc);
    std::ofstream(dir_ / "config.json") << nlohmann::json(cfg_).dump(2) << '\n';
  }

  std::vector<tok::PairLength> lengths;
  lengths.reserve(train_.size());
  for (const auto& e : train_) {
    lengths.push_back({static_cast<int>(e.src.size()), static_cast<int>(e.tgt.size())});
  }
  const tok::BucketConfig bucket{cfg_.optimizer.token_budget, cfg_.bucket_width};
  const auto order_seed = cfg_.effective_order_seed();
  const auto dropout_seed = derive_seed(cfg_.effective_init_seed(), 0xd0);
  st.batches = tok::bucket_batches(lengths, bucket, derive_seed(order_seed, static_cast<std::uint64_t>(st.epoch)));

  const auto after_eval = [&](const diag::MetricsRecord& r) {
    for (const double t : cfg_.snapshot_thresholds) {
      const auto label = threshold_label(t);
      if (r.perfect_accuracy >= t && st.reached.insert(label).second) {
        summary_.threshold_steps[label] = r.step;
        if (!dir_.empty() && (summary_.checkpoints.empty() || summary_.checkpoints.back() != r.step)) {
          save(dir_ / "checkpoints" / (step_name(r.step) + ".ckpt"));
          summary_.checkpoints.push_back(r.step);
        }
      }
    }
    const double stop = cfg_.optimizer.early_stop;
    summary_.early_stopped = stop > 0 && r.perfect_accuracy >= stop;
    summary_.steps = st.step;
    if (!dir_.empty()) {
      save(dir_ / "latest.ckpt");
    }
    return summary_.early_stopped;
  };

  if (!resuming) {
    if (!dir_.empty() && std::find(cfg_.snapshot_steps.begin(), cfg_.snapshot_steps.end(), 0L) != cfg_.snapshot_steps.end()) {
      save(dir_ / "checkpoints" / (step_name(0) + ".ckpt"));
      summary_.checkpoints.push_back(0);
    }
    if (after_eval(evaluate(0, 0.0))) {
      write_summary();
      return summary_;
    }
  } else if (summary_.early_stopped) {
    return summary_;
  }

  const int pad = cfg_.model.pad_id;
  const float accumulation_scale = 1.0F / static_cast<float>(cfg_.optimizer.accumulation);
  double loss_sum = 0;
  long loss_count = 0;
  while (st.step < cfg_.optimizer.max_steps) {
    model_->zero_grad();
    for (int a = 0; a < cfg_.optimizer.accumulation; ++a) {
      if (st.batch_pos == st.batches.size()) {
        ++st.epoch;
        summary_.epochs = st.epoch;
        st.batch_pos = 0;
        st.batches = tok::bucket_batches(lengths, bucket, derive_seed(order_seed, static_cast<std::uint64_t>(st.epoch)));
      }
      const auto& batch = st.batches[st.batch_pos++];
      std::vector<diag::Sequence> s;
      std::vector<diag::Sequence> t;
      for (const int i : batch.indices) {
        s.push_back(train_[static_cast<std::size_t>(i)].src);
        t.push_back(train_[static_cast<std::size_t>(i)].tgt);
      }
      Rng dropout(derive_seed(dropout_seed, static_cast<std::uint64_t>(st.batch_counter++)));
      nn::Tape<float> tape;
      const auto l = model_->loss(tape, nn::TokenBatch::pack(s, pad), nn::TokenBatch::pack(t, pad), &dropout);
      const double value = tape.value(l)(0, 0);
      if (!std::isfinite(value)) {
        throw DivergenceDetected("training loss became non-finite at step " + std::to_string(st.step + 1));
      }
      loss_sum += value;
      ++loss_count;
      tape.backward(l);
    }
    if (cfg_.optimizer.accumulation > 1) {
      for (auto& p : model_->parameters()) {
        p.grad *= accumulation_scale;
      }
    }
    ++st.step;
    const double lr = noam_lr(st.step, cfg_.model.d_model, cfg_.optimizer.warmup_steps) * cfg_.optimizer.lr_scale;
    try {
      adam_->step(model_->parameters(), lr);
    } catch (const NonFiniteGradient& e) {
      throw DivergenceDetected(e.what());
    }
    if (!dir_.empty() &&
        std::find(cfg_.snapshot_steps.begin(), cfg_.snapshot_steps.end(), st.step) != cfg_.snapshot_steps.end()) {
      save(dir_ / "checkpoints" / (step_name(st.step) + ".ckpt"));
      summary_.checkpoints.push_back(st.step);
    }
    if (st.step % cfg_.eval_interval == 0 || st.step == cfg_.optimizer.max_steps) {
      const double mean = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
      loss_sum = 0;
      loss_count = 0;
      if (after_eval(evaluate(st.step, mean))) {
        break;
      }
    }
  }
  summary_.steps = st.step;
  write_summary();
  return summary_;
}

}  // namespace chemlab::train
