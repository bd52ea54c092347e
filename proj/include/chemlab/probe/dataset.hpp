// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chemlab/molgraph/molecule.hpp"

namespace chemlab::probe {

enum class TaskType : std::uint8_t { Regression, Classification };
enum class SplitStrategy : std::uint8_t { Random, Scaffold };

std::string_view to_string(TaskType t) noexcept;
std::string_view to_string(SplitStrategy s) noexcept;
TaskType task_type_from_string(std::string_view s);
SplitStrategy split_strategy_from_string(std::string_view s);

class MissingColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyDataset : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooFewScaffolds : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropertyRecord {
  std::string smiles;  // canonical
  double target = 0;
  mol::Molecule molecule;
};

struct PropertyDataset {
  std::string name;
  TaskType task = TaskType::Regression;
  SplitStrategy split = SplitStrategy::Random;
  std::vector<PropertyRecord> records;
  long rows = 0;
  long dropped_invalid = 0;    // unparseable or invalid SMILES
  long dropped_target = 0;     // empty or non-finite target
  long dropped_duplicate = 0;
};

/// Splits one CSV line into fields, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a headed CSV. Rows with invalid SMILES or missing targets are
/// dropped and counted; the first occurrence of each canonical form wins.
/// Classification targets must be 0 or 1.
PropertyDataset ingest_csv(const std::filesystem::path& path, std::string_view smiles_column,
                           std::string_view target_column, TaskType task, std::string name = {});

struct Fold {
  std::vector<int> train;
  std::vector<int> valid;
  std::vector<int> test;
};

/// 80/10/10 folds. Random: a fresh shuffle per fold. Scaffold: Murcko
/// scaffold groups ordered largest first (ties in a per-fold random order)
/// and filled into train, then valid, then test.
std::vector<Fold> split(const PropertyDataset& ds, SplitStrategy strategy, int n_folds, std::uint64_t seed);

}  // namespace chemlab::probe
