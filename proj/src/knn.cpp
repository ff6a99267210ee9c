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

#include "drift/knn.hpp"

#include <algorithm>
#include <cmath>

#include "drift/parallel.hpp"

namespace drift {

void KnnClassifier::fit(const Dataset& ds) {
  if (k_ == 0) throw ConfigError("knn requires k >= 1");
  if (k_ > ds.n_rows()) {
    throw ConfigError("knn k=" + std::to_string(k_) + " exceeds n=" +
                      std::to_string(ds.n_rows()));
  }
  train_ = ds.features();
  labels_ = ds.labels();
  classes_ = ds.class_set();

  means_.assign(ds.n_cols(), 0.0);
  stddevs_.assign(ds.n_cols(), 0.0);
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (ds.columns()[c].kind != ColumnKind::kNumeric) continue;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      const double v = ds.at(r, c);
      if (std::isnan(v)) continue;
      sum += v;
      sum_sq += v * v;
      ++count;
    }
    if (count == 0) continue;
    means_[c] = sum / static_cast<double>(count);
    const double var = sum_sq / static_cast<double>(count) -
                       means_[c] * means_[c];
    stddevs_[c] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
}

ProbabilityMatrix KnnClassifier::predict_proba(
    const FeatureTable& table) const {
  if (train_.n_rows() == 0) throw DriftError("predict on unfitted knn");
  if (table.n_cols() != train_.n_cols()) {
    throw SchemaError("knn feature table has " +
                      std::to_string(table.n_cols()) + " columns, expected " +
                      std::to_string(train_.n_cols()));
  }
  ProbabilityMatrix probs(table.n_rows(), classes_.size());
  parallel_for(table.n_rows(), [&](std::size_t q) {
    std::vector<std::pair<double, std::size_t>> dist(train_.n_rows());
    for (std::size_t t = 0; t < train_.n_rows(); ++t) {
      double d = 0.0;
      for (std::size_t c = 0; c < train_.n_cols(); ++c) {
        const ColumnKind kind = train_.column(c).kind;
        const double a = table.at(q, c);
        const double b = train_.at(t, c);
        const bool ma = is_missing(a, kind);
        const bool mb = is_missing(b, kind);
        if (ma != mb) {
          d += 1.0;
        } else if (ma && mb) {
          // both missing: no contribution
        } else if (kind == ColumnKind::kNumeric) {
          const double s = stddevs_[c] > 0.0 ? stddevs_[c] : 1.0;
          const double z = (a - b) / s;
          d += z * z;
        } else if (a != b) {
          d += 1.0;
        }
      }
      dist[t] = {d, t};
    }
    // equal distances resolve by training row index
    std::sort(dist.begin(), dist.end());
    std::vector<double> counts(classes_.size(), 0.0);
    for (std::size_t i = 0; i < k_; ++i) {
      counts[static_cast<std::size_t>(labels_[dist[i].second])] += 1.0;
    }
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      probs.set(q, c, counts[c] / static_cast<double>(k_));
    }
  });
  return probs;
}

nlohmann::ordered_json KnnClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "knn_classifier";
  j["version"] = 1;
  j["k"] = k_;
  j["classes"] = classes_;
  j["labels"] = labels_;
  j["means"] = means_;
  j["stddevs"] = stddevs_;
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const Column& c : train_.columns()) {
    cols.push_back({{"name", c.name},
                    {"kind", c.kind == ColumnKind::kNumeric ? "numeric"
                                                            : "categorical"},
                    {"vocab", c.vocab}});
  }
  j["columns"] = std::move(cols);
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < train_.n_rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < train_.n_cols(); ++c) {
      const double v = train_.at(r, c);
      if (std::isnan(v)) {
        row.push_back(nullptr);
      } else {
        row.push_back(v);
      }
    }
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  return j;
}

std::unique_ptr<KnnClassifier> KnnClassifier::from_json(
    const nlohmann::ordered_json& j) {
  auto model = std::make_unique<KnnClassifier>(j.at("k").get<std::size_t>());
  model->classes_ = j.at("classes").get<std::vector<std::string>>();
  model->labels_ = j.at("labels").get<std::vector<int>>();
  model->means_ = j.at("means").get<std::vector<double>>();
  model->stddevs_ = j.at("stddevs").get<std::vector<double>>();
  std::vector<Column> cols;
  for (const auto& item : j.at("columns")) {
    Column c;
    c.name = item.at("name").get<std::string>();
    c.kind = item.at("kind").get<std::string>() == "numeric"
                 ? ColumnKind::kNumeric
                 : ColumnKind::kCategorical;
    c.vocab = item.at("vocab").get<std::vector<std::string>>();
    cols.push_back(std::move(c));
  }
  const auto& cells = j.at("cells");
  FeatureTable table(std::move(cols), cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      const auto& cell = cells[r][c];
      table.set(r, c, cell.is_null() ? missing_numeric()
                                     : cell.get<double>());
    }
  }
  model->train_ = std::move(table);
  return model;
}

}  // namespace drift
