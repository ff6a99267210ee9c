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

#include "drift/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "drift/rng.hpp"

namespace drift {

FeatureTable::FeatureTable(std::vector<Column> columns, std::size_t n_rows)
    : columns_(std::move(columns)),
      n_rows_(n_rows),
      cells_(n_rows * columns_.size(), 0.0) {}

std::optional<std::size_t> FeatureTable::column_index(
    const std::string& name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].name == name) return c;
  }
  return std::nullopt;
}

FeatureTable FeatureTable::take_rows(std::span<const std::size_t> rows) const {
  FeatureTable out(columns_, rows.size());
  const std::size_t d = columns_.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) out.set(i, c, at(rows[i], c));
  }
  return out;
}

FeatureTable FeatureTable::drop_column(std::size_t col) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size() - 1);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c != col) cols.push_back(columns_[c]);
  }
  FeatureTable out(std::move(cols), n_rows_);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c != col) out.set(r, k++, at(r, c));
    }
  }
  return out;
}

bool FeatureTable::same_schema(const FeatureTable& other) const {
  if (columns_.size() != other.columns_.size()) return false;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const Column& a = columns_[c];
    const Column& b = other.columns_[c];
    if (a.name != b.name || a.kind != b.kind || a.vocab != b.vocab) {
      return false;
    }
  }
  return true;
}

Dataset::Dataset(FeatureTable features, std::vector<int> labels,
                 std::vector<std::string> class_set)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_set_(std::move(class_set)) {
  if (labels_.size() != features_.n_rows()) {
    throw SchemaError("label vector length " + std::to_string(labels_.size()) +
                      " does not match row count " +
                      std::to_string(features_.n_rows()));
  }
  if (class_set_.empty()) throw SchemaError("class set is empty");
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_set_.size()) {
      throw SchemaError("label id " + std::to_string(y) +
                        " outside class set of size " +
                        std::to_string(class_set_.size()));
    }
  }
  for (std::size_t c = 0; c < features_.n_cols(); ++c) {
    const Column& col = features_.column(c);
    if (col.kind != ColumnKind::kCategorical) continue;
    for (std::size_t r = 0; r < features_.n_rows(); ++r) {
      const double v = features_.at(r, c);
      if (v == kMissingCategory) continue;
      if (v < 0.0 || v != std::floor(v) ||
          v >= static_cast<double>(col.vocab.size())) {
        throw SchemaError("invalid category code in column '" + col.name +
                          "' at row " + std::to_string(r));
      }
    }
  }
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = labels_[rows[i]];
  return Dataset(features_.take_rows(rows), std::move(labels), class_set_);
}

Dataset Dataset::drop_column(std::size_t col) const {
  return Dataset(features_.drop_column(col), labels_, class_set_);
}

namespace {

// One RFC 4180 record; handles quoted fields, doubled quotes and
// embedded newlines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line_no) {
  fields.clear();
  int ch = in.get();
  if (ch == EOF) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  while (true) {
    if (ch == EOF) {
      if (quoted) {
        throw ParseError("unterminated quoted field at line " +
                         std::to_string(line_no));
      }
      fields.push_back(field);
      return true;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !any) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
      any = false;
      ch = in.get();
      continue;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(field);
      ++line_no;
      return true;
    } else {
      field.push_back(c);
      any = true;
    }
    ch = in.get();
  }
}

double parse_numeric_cell(const std::string& text, std::size_t row) {
  if (text.empty()) return missing_numeric();
  const char* first = text.data();
  const char* last = first + text.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("row " + std::to_string(row) +
                     ": cannot parse numeric cell '" + text + "'");
  }
  return value;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_raw_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  RawTable raw;
  std::size_t line_no = 1;
  if (!read_record(in, raw.header, line_no) || raw.header.empty()) {
    throw ParseError("'" + path + "': missing header row");
  }
  std::vector<std::string> fields;
  while (read_record(in, fields, line_no)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != raw.header.size()) {
      throw ParseError("row " + std::to_string(raw.rows.size() + 1) + ": got " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(raw.header.size()));
    }
    raw.rows.push_back(fields);
  }
  return raw;
}

// Builds columns from raw cells; categorical vocabularies are the
// sorted distinct non-empty values, so they do not depend on row order.
FeatureTable build_table(const RawTable& raw,
                         const std::vector<std::size_t>& keep,
                         const Schema& schema) {
  std::vector<Column> columns;
  columns.reserve(keep.size());
  for (std::size_t c : keep) {
    Column col;
    col.name = raw.header[c];
    col.kind = schema.at(col.name);
    if (col.kind == ColumnKind::kCategorical) {
      std::set<std::string> values;
      for (const auto& row : raw.rows) {
        if (!row[c].empty()) values.insert(row[c]);
      }
      col.vocab.assign(values.begin(), values.end());
    }
    columns.push_back(std::move(col));
  }
  FeatureTable table(columns, raw.rows.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t c = keep[i];
    const Column& col = table.column(i);
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const std::string& text = raw.rows[r][c];
      if (col.kind == ColumnKind::kNumeric) {
        table.set(r, i, parse_numeric_cell(text, r));
      } else if (text.empty()) {
        table.set(r, i, kMissingCategory);
      } else {
        const auto it =
            std::lower_bound(col.vocab.begin(), col.vocab.end(), text);
        table.set(r, i, static_cast<double>(it - col.vocab.begin()));
      }
    }
  }
  return table;
}

void check_schema_covers(const RawTable& raw, const Schema& schema) {
  for (const std::string& name : raw.header) {
    if (!schema.count(name)) {
      throw SchemaError("column '" + name + "' not covered by schema");
    }
  }
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_cell(double value, const Column& col) {
  if (is_missing(value, col.kind)) return "";
  if (col.kind == ColumnKind::kCategorical) {
    return quote_csv(col.vocab[static_cast<std::size_t>(value)]);
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace

Dataset load_csv(const std::string& path, const Schema& schema,
                 const std::string& label) {
  RawTable raw = read_raw_csv(path);
  check_schema_covers(raw, schema);
  const auto label_it = std::find(raw.header.begin(), raw.header.end(), label);
  if (label_it == raw.header.end()) {
    throw SchemaError("label column '" + label + "' not present in '" + path +
                      "'");
  }
  if (schema.at(label) != ColumnKind::kCategorical) {
    throw SchemaError("label column '" + label +
                      "' must be declared categorical");
  }
  const std::size_t label_col =
      static_cast<std::size_t>(label_it - raw.header.begin());

  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (c != label_col) keep.push_back(c);
  }
  FeatureTable features = build_table(raw, keep, schema);

  std::set<std::string> class_values;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const std::string& text = raw.rows[r][label_col];
    if (text.empty()) {
      throw SchemaError("row " + std::to_string(r) + ": missing label value");
    }
    class_values.insert(text);
  }
  std::vector<std::string> class_set(class_values.begin(), class_values.end());
  std::vector<int> labels(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto it = std::lower_bound(class_set.begin(), class_set.end(),
                                     raw.rows[r][label_col]);
    labels[r] = static_cast<int>(it - class_set.begin());
  }
  return Dataset(std::move(features), std::move(labels), std::move(class_set));
}

FeatureTable load_features_csv(const std::string& path, const Schema& schema) {
  RawTable raw = read_raw_csv(path);
  check_schema_covers(raw, schema);
  std::vector<std::size_t> keep(raw.header.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  return build_table(raw, keep, schema);
}

void write_features_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (c) out << ',';
    out << quote_csv(table.column(c).name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (c) out << ',';
      out << format_cell(table.at(r, c), table.column(c));
    }
    out << '\n';
  }
}

void write_csv(const Dataset& ds, const std::string& path,
               const std::string& label_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    out << quote_csv(ds.columns()[c].name) << ',';
  }
  out << quote_csv(label_name) << '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      out << format_cell(ds.at(r, c), ds.columns()[c]) << ',';
    }
    out << quote_csv(ds.class_set()[static_cast<std::size_t>(ds.labels()[r])])
        << '\n';
  }
}

Schema infer_schema(const std::string& path) {
  RawTable raw = read_raw_csv(path);
  Schema schema;
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    bool numeric = true;
    bool any = false;
    for (const auto& row : raw.rows) {
      if (row[c].empty()) continue;
      any = true;
      const char* first = row[c].data();
      const char* last = first + row[c].size();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) {
        numeric = false;
        break;
      }
    }
    schema[raw.header[c]] =
        (numeric && any) ? ColumnKind::kNumeric : ColumnKind::kCategorical;
  }
  return schema;
}

SplitResult split_by_variable(const Dataset& ds, const SplitPlan& plan) {
  const auto col = ds.features().column_index(plan.split_variable);
  if (!col) {
    throw SchemaError("split variable '" + plan.split_variable +
                      "' not found");
  }
  const Column& column = ds.features().column(*col);
  if (column.kind != ColumnKind::kCategorical) {
    throw SchemaError("split variable '" + plan.split_variable +
                      "' must be categorical");
  }
  const auto source_it = std::find(column.vocab.begin(), column.vocab.end(),
                                   plan.source_value);
  if (source_it == column.vocab.end()) {
    throw EmptyDomainError("source value '" + plan.source_value +
                           "' not present in '" + plan.split_variable + "'");
  }
  const double source_code =
      static_cast<double>(source_it - column.vocab.begin());

  // Resolve target groups: explicit groups must cover the remaining
  // categories exactly; the default is one group per category.
  std::vector<std::string> remaining;
  for (const std::string& v : column.vocab) {
    if (v != plan.source_value) remaining.push_back(v);
  }
  if (remaining.empty()) {
    throw EmptyDomainError("split variable '" + plan.split_variable +
                           "' has no categories besides the source value");
  }
  std::vector<std::vector<std::string>> groups = plan.target_groups;
  if (groups.empty()) {
    for (const std::string& v : remaining) groups.push_back({v});
  } else {
    std::set<std::string> covered;
    for (const auto& group : groups) {
      for (const std::string& v : group) {
        if (v == plan.source_value) {
          throw ConfigError("target group contains the source value '" + v +
                            "'");
        }
        if (std::find(remaining.begin(), remaining.end(), v) ==
            remaining.end()) {
          throw ConfigError("target group value '" + v +
                            "' not a category of '" + plan.split_variable +
                            "'");
        }
        if (!covered.insert(v).second) {
          throw ConfigError("target group value '" + v +
                            "' appears more than once");
        }
      }
    }
    if (covered.size() != remaining.size()) {
      throw ConfigError("target groups must cover all non-source categories "
                        "of '" + plan.split_variable + "'");
    }
  }

  std::map<double, std::size_t> code_to_group;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const std::string& v : groups[g]) {
      const auto it = std::find(column.vocab.begin(), column.vocab.end(), v);
      code_to_group[static_cast<double>(it - column.vocab.begin())] = g;
    }
  }

  std::vector<std::size_t> source_rows;
  std::vector<std::vector<std::size_t>> target_rows(groups.size());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    const double v = ds.at(r, *col);
    if (is_missing(v, ColumnKind::kCategorical)) {
      throw SchemaError("row " + std::to_string(r) +
                        ": missing value in split variable");
    }
    if (v == source_code) {
      source_rows.push_back(r);
    } else {
      target_rows[code_to_group.at(v)].push_back(r);
    }
  }
  if (source_rows.empty()) {
    throw EmptyDomainError("source value '" + plan.source_value +
                           "' selects no rows");
  }

  SplitResult result;
  result.source = ds.take_rows(source_rows).drop_column(*col);
  for (const auto& rows : target_rows) {
    result.targets.push_back(ds.take_rows(rows).drop_column(*col));
  }
  return result;
}

Pools make_pools(const Dataset& source, std::size_t n_samples,
                 std::uint64_t seed) {
  const std::size_t need = 4 * n_samples;
  if (source.n_rows() < need) {
    throw SizeError("make_pools requires " + std::to_string(need) +
                    " rows, dataset has " + std::to_string(source.n_rows()));
  }
  Rng rng(derive_seed(seed, "pools"));
  const auto idx = rng.sample_without_replacement(source.n_rows(), need);
  const std::span<const std::size_t> all(idx);

  Pools pools;
  pools.primary_train = source.take_rows(all.subspan(0, n_samples));
  pools.source_pool = source.take_rows(all.subspan(n_samples, 2 * n_samples));
  pools.primary_target = source.take_rows(all.subspan(3 * n_samples,
                                                      n_samples));
  pools.primary_valid =
      sample_rows(pools.source_pool, n_samples, derive_seed(seed, "valid"));
  return pools;
}

Dataset sample_rows(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k > ds.n_rows()) {
    throw SizeError("cannot draw " + std::to_string(k) + " rows from " +
                    std::to_string(ds.n_rows()));
  }
  Rng rng(derive_seed(seed, "sample-rows"));
  const auto idx = rng.sample_without_replacement(ds.n_rows(), k);
  return ds.take_rows(idx);
}

}  // namespace drift
