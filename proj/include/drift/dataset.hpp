/*
 * Copyright 2026 The driftbench authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drift/errors.hpp"

namespace drift {

enum class ColumnKind { kNumeric, kCategorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Category labels, sorted; cell values of categorical columns are
  // indices into this vocabulary. Empty for numeric columns.
  std::vector<std::string> vocab;
};

// Missing markers: NaN for numeric cells, a reserved negative code for
// categorical cells.
constexpr double kMissingCategory = -1.0;
inline double missing_numeric() {
  return std::numeric_limits<double>::quiet_NaN();
}
inline bool is_missing(double cell, ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? std::isnan(cell) : cell < 0.0;
}

// Feature-only table: column metadata plus an n x d cell matrix.
// Ground-truth labels never live here; prediction paths take a
// FeatureTable so labels cannot leak into them.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::vector<Column> columns, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  double at(std::size_t row, std::size_t col) const {
    return cells_[row * columns_.size() + col];
  }
  void set(std::size_t row, std::size_t col, double value) {
    cells_[row * columns_.size() + col] = value;
  }

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t col) const { return columns_[col]; }
  std::optional<std::size_t> column_index(const std::string& name) const;

  FeatureTable take_rows(std::span<const std::size_t> rows) const;
  FeatureTable drop_column(std::size_t col) const;

  // True when names, kinds and vocabularies all agree.
  bool same_schema(const FeatureTable& other) const;

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::vector<double> cells_;  // row-major
};

// Immutable labeled table. All mutation goes through copy-producing
// operations, so a Dataset is safe to share across worker threads.
class Dataset {
 public:
  Dataset() = default;
  // Validates: labels length matches rows, class ids within class_set,
  // categorical cells within vocabulary. Throws SchemaError.
  Dataset(FeatureTable features, std::vector<int> labels,
          std::vector<std::string> class_set);

  const FeatureTable& features() const { return features_; }
  std::size_t n_rows() const { return features_.n_rows(); }
  std::size_t n_cols() const { return features_.n_cols(); }
  double at(std::size_t row, std::size_t col) const {
    return features_.at(row, col);
  }
  const std::vector<Column>& columns() const { return features_.columns(); }

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_set() const { return class_set_; }
  std::size_t n_classes() const { return class_set_.size(); }

  Dataset take_rows(std::span<const std::size_t> rows) const;
  Dataset drop_column(std::size_t col) const;

 private:
  FeatureTable features_;
  std::vector<int> labels_;
  std::vector<std::string> class_set_;
};

using Schema = std::unordered_map<std::string, ColumnKind>;

// CSV ingestion (RFC 4180 quoting, UTF-8, header row required). The
// schema must cover every header column; the label column must be
// declared categorical. Missing cells map to the missing markers.
Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::string& label);

// Same parser for unlabeled data (e.g. a deployment batch).
FeatureTable load_features_csv(const std::string& path, const Schema& schema);

void write_csv(const Dataset& ds, const std::string& path,
               const std::string& label_name);
void write_features_csv(const FeatureTable& table, const std::string& path);

// Guesses a schema from cell contents: a column whose non-empty cells
// all parse as numbers is numeric, otherwise categorical.
Schema infer_schema(const std::string& path);

// Natural-shift split recipe. When target_groups is empty, every
// remaining category becomes its own target domain; otherwise the
// groups must cover the remaining categories exactly (this is how a
// protocol collapses several category values into one domain).
struct SplitPlan {
  std::string split_variable;
  std::string source_value;
  std::vector<std::vector<std::string>> target_groups;
};

struct SplitResult {
  Dataset source;
  std::vector<Dataset> targets;
};

// Partitions ds by the split variable and removes that column from
// every output. Rows with a missing split value are rejected.
SplitResult split_by_variable(const Dataset& ds, const SplitPlan& plan);

// Disjoint row pools for one experiment run.
struct Pools {
  Dataset primary_train;   // n rows, trains the primary model
  Dataset source_pool;     // 2n rows, clean draws for train scenarios
  Dataset primary_valid;   // n rows from source_pool, scoring reference
  Dataset primary_target;  // n rows, clean draws for test scenarios
};

// Carves (n, 2n, n, n) pools out of source; primary_valid is sampled
// from source_pool, the other three are pairwise disjoint. Requires at
// least 4n rows. Deterministic under seed.
Pools make_pools(const Dataset& source, std::size_t n_samples,
                 std::uint64_t seed);

// k rows without replacement, in draw order. Deterministic under seed.
Dataset sample_rows(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace drift
