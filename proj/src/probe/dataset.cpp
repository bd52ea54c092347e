// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/probe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/molgraph/smiles.hpp"
#include "chemlab/molgraph/structure.hpp"
#include "chemlab/molgraph/validate.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::probe {

std::string_view to_string(TaskType t) noexcept {
  return t == TaskType::Regression ? "regression" : "classification";
}

std::string_view to_string(SplitStrategy s) noexcept {
  return s == SplitStrategy::Random ? "random" : "scaffold";
}

TaskType task_type_from_string(std::string_view s) {
  if (s == "regression") {
    return TaskType::Regression;
  }
  if (s == "classification") {
    return TaskType::Classification;
  }
  throw std::invalid_argument("unknown task type '" + std::string(s) + "'");
}

SplitStrategy split_strategy_from_string(std::string_view s) {
  if (s == "random") {
    return SplitStrategy::Random;
  }
  if (s == "scaffold") {
    return SplitStrategy::Scaffold;
  }
  throw std::invalid_argument("unknown split strategy '" + std::string(s) + "'");
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

namespace {

std::size_t column_index(const std::vector<std::string>& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw MissingColumn("column '" + std::string(name) + "' not found");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') {
    s.remove_prefix(1);
  }
  while (!s.empty() && s.back() == ' ') {
    s.remove_suffix(1);
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

PropertyDataset ingest_csv(const std::filesystem::path& path, std::string_view smiles_column,
                           std::string_view target_column, TaskType task, std::string name) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  PropertyDataset ds;
  ds.name = name.empty() ? path.stem().string() : std::move(name);
  ds.task = task;
  std::string line;
  if (!std::getline(in, line)) {
    throw EmptyDataset(path.string() + " has no header");
  }
  const auto header = split_csv_line(line);
  const auto si = column_index(header, smiles_column);
  const auto ti = column_index(header, target_column);
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    ++ds.rows;
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max(si, ti)) {
      ++ds.dropped_invalid;
      continue;
    }
    const auto target = parse_number(fields[ti]);
    if (!target) {
      ++ds.dropped_target;
      continue;
    }
    if (task == TaskType::Classification && *target != 0.0 && *target != 1.0) {
      throw std::invalid_argument(path.string() + ": classification target must be 0 or 1, got " + fields[ti]);
    }
    std::optional<mol::Molecule> m;
    try {
      m = mol::strip_fragments(mol::parse_smiles(fields[si]));
    } catch (const std::exception&) {
    }
    if (!m || m->atom_count() == 0 || !mol::validate_molecule(*m)) {
      ++ds.dropped_invalid;
      continue;
    }
    auto canonical = mol::canonical_smiles(*m);
    if (!seen.insert(canonical).second) {
      ++ds.dropped_duplicate;
      continue;
    }
    ds.records.push_back({std::move(canonical), *target, std::move(*m)});
  }
  if (ds.records.empty()) {
    throw EmptyDataset(path.string() + " has no usable rows");
  }
  return ds;
}

std::vector<Fold> split(const PropertyDataset& ds, SplitStrategy strategy, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) {
    throw std::invalid_argument("split needs at least 2 folds");
  }
  const auto n = ds.records.size();
  const auto n_train = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n)));
  std::vector<std::vector<int>> groups;
  if (strategy == SplitStrategy::Scaffold) {
    std::map<std::string, std::vector<int>> by_key;
    for (std::size_t i = 0; i < n; ++i) {
      by_key[mol::scaffold_key(ds.records[i].molecule)].push_back(static_cast<int>(i));
    }
    if (by_key.size() < 3) {
      throw TooFewScaffolds("scaffold split needs at least 3 scaffold groups, found " +
                            std::to_string(by_key.size()));
    }
    for (auto& [key, members] : by_key) {
      groups.push_back(std::move(members));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      groups.push_back({static_cast<int>(i)});
    }
  }

  std::vector<Fold> folds;
  for (int f = 0; f < n_folds; ++f) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(f)));
    auto order = groups;
    rng.shuffle(order.begin(), order.end());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    Fold fold;
    for (const auto& g : order) {
      if (fold.train.size() + g.size() <= n_train) {
        fold.train.insert(fold.train.end(), g.begin(), g.end());
      } else if (fold.valid.size() + g.size() <= n_valid) {
        fold.valid.insert(fold.valid.end(), g.begin(), g.end());
      } else {
        fold.test.insert(fold.test.end(), g.begin(), g.end());
      }
    }
    if (fold.train.empty() || fold.valid.empty() || fold.test.empty()) {
      if (strategy == SplitStrategy::Random) {
        throw EmptyDataset("dataset too small for an 80/10/10 split");
      }
      throw TooFewScaffolds("split left an empty part; scaffold groups are too uneven");
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace chemlab::probe
