// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/diagnostics/curves.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "chemlab/molgraph/validate.hpp"

namespace chemlab::diag {

void to_json(nlohmann::json& j, const MetricsRecord& r) {
  nlohmann::json tf = nlohmann::json::object();
  for (const auto& [token, tally] : r.teacher_forced) {
    tf[token] = {{"hits", tally.hits}, {"total", tally.total}, {"accuracy", tally.accuracy()}};
  }
  j = {{"schema", kMetricsSchema},
       {"step", r.step},
       {"loss", r.loss},
       {"train_loss", r.train_loss},
       {"learning_rate", r.learning_rate},
       {"perfect_accuracy", r.perfect_accuracy},
       {"partial_accuracy", r.partial_accuracy},
       {"validity", r.validity},
       {"tanimoto", r.tanimoto},
       {"masked_accuracy", r.masked_accuracy},
       {"teacher_forced", tf},
       {"chirality",
        {{"correct", r.chirality.correct},
         {"chiral_only", r.chirality.chiral_only},
         {"other", r.chirality.other},
         {"at_for_atat", r.chirality.at_for_atat},
         {"atat_for_at", r.chirality.atat_for_at},
         {"fraction_correct", r.chirality.fraction_correct()},
         {"fraction_chiral_only", r.chirality.fraction_chiral_only()},
         {"fraction_other", r.chirality.fraction_other()}}}};
}

void from_json(const nlohmann::json& j, MetricsRecord& r) {
  if (j.value("schema", 0) != kMetricsSchema) {
    throw std::runtime_error("unsupported metrics schema");
  }
  r.step = j.at("step").get<long>();
  r.loss = j.at("loss").get<double>();
  r.train_loss = j.at("train_loss").get<double>();
  r.learning_rate = j.at("learning_rate").get<double>();
  r.perfect_accuracy = j.at("perfect_accuracy").get<double>();
  r.partial_accuracy = j.at("partial_accuracy").get<double>();
  r.validity = j.at("validity").get<double>();
  r.tanimoto = j.at("tanimoto").get<std::map<std::string, double>>();
  r.masked_accuracy = j.at("masked_accuracy").get<std::map<std::string, double>>();
  r.teacher_forced.clear();
  for (const auto& [token, v] : j.at("teacher_forced").items()) {
    r.teacher_forced[token] = TokenTally{v.at("hits").get<long>(), v.at("total").get<long>()};
  }
  const auto& c = j.at("chirality");
  r.chirality.correct = c.at("correct").get<long>();
  r.chirality.chiral_only = c.at("chiral_only").get<long>();
  r.chirality.other = c.at("other").get<long>();
  r.chirality.at_for_atat = c.at("at_for_atat").get<long>();
  r.chirality.atat_for_at = c.at("atat_for_at").get<long>();
}

MetricsCurve read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  MetricsCurve curve;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      curve.push_back(nlohmann::json::parse(line).get<MetricsRecord>());
    }
  }
  return curve;
}

std::optional<long> step_threshold(const MetricsCurve& curve, double threshold) {
  for (const auto& r : curve) {
    if (r.perfect_accuracy >= threshold) {
      return r.step;
    }
  }
  return std::nullopt;
}

std::optional<double> mean_tanimoto(const std::vector<std::string>& predictions,
                                    const std::vector<mol::Molecule>& targets,
                                    const fp::FingerprintConfig& cfg) {
  if (predictions.size() != targets.size()) {
    throw LengthMismatch("prediction and target lists differ in length");
  }
  double sum = 0;
  long n = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto m = mol::parse_valid(predictions[i]);
    if (!m) {
      continue;
    }
    sum += fp::tanimoto(fp::fingerprint(*m, cfg), fp::fingerprint(targets[i], cfg));
    ++n;
  }
  if (n == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(n);
}

SimilarityCurve similarity_curve(
    const std::vector<std::pair<long, std::vector<std::string>>>& predictions,
    const std::vector<mol::Molecule>& targets, const std::vector<fp::FingerprintConfig>& cfgs) {
  SimilarityCurve out;
  const std::size_t n = targets.size();
  std::vector<std::vector<std::optional<mol::Molecule>>> parsed;
  std::vector<bool> keep(n, true);
  for (const auto& [step, preds] : predictions) {
    if (preds.size() != n) {
      throw LengthMismatch("predictions at step " + std::to_string(step) + " do not cover the targets");
    }
    out.steps.push_back(step);
    auto& row = parsed.emplace_back();
    for (std::size_t i = 0; i < n; ++i) {
      row.push_back(mol::parse_valid(preds[i]));
      if (!row.back()) {
        keep[i] = false;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.molecules += keep[i] ? 1 : 0;
  }
  out.omitted = static_cast<long>(n) - out.molecules;
  for (const auto& cfg : cfgs) {
    auto& series = out.mean[cfg.name()];
    std::vector<fp::Fingerprint> target_fps;
    for (std::size_t i = 0; i < n; ++i) {
      target_fps.push_back(fp::fingerprint(targets[i], cfg));
    }
    for (const auto& row : parsed) {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) {
          sum += fp::tanimoto(fp::fingerprint(*row[i], cfg), target_fps[i]);
        }
      }
      series.push_back(out.molecules > 0 ? sum / static_cast<double>(out.molecules)
                                         : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

void SimilarityCurve::write_csv(std::ostream& out) const {
  out << "step";
  for (const auto& [name, _] : mean) {
    out << ',' << name;
  }
  out << ",molecules,omitted\n";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    out << steps[k];
    for (const auto& [_, series] : mean) {
      out << ',';
      if (defined()) {
        out << std::setprecision(10) << series[k];
      }
    }
    out << ',' << molecules << ',' << omitted << '\n';
  }
}

}  // namespace chemlab::diag
