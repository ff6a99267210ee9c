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

#include <map>
#include <string>
#include <vector>

#include "drift/drift_features.hpp"
#include "drift/metrics.hpp"

#include "json.hpp"

namespace drift {

// One evaluated meta-dataset under one predictor.
struct DatasetRow {
  std::string scenario_id;
  std::string shift_kind;
  double severity = 0.0;
  double feature_fraction = 0.0;
  std::size_t n = 0;
  double true_acc = 0.0;
  Interval true_ci;
  double pred_acc = 0.0;
  Interval pred_ci;
  double abs_err = 0.0;
};

// Shift-aware metrics of one predictor on one scenario set.
struct MetricBlock {
  std::size_t k = 0;
  double mae = 0.0;
  double mae_ci = 0.0;
  double acc_ci = 0.0;
  double picp = 0.0;
  double mpiw = 0.0;
  std::vector<DatasetRow> rows;
};

// Drift feature vectors recorded for audit, one per scenario.
struct FeatureAuditRow {
  std::string scenario_id;
  DriftFeatureVector features;
};

struct EvalReport {
  int run_index = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double source_accuracy = 0.0;
  double atc_threshold = 0.0;
  bool has_atc = false;
  std::vector<std::string> predictor_names;
  // predictor name -> scenario set name -> metrics
  std::map<std::string, std::map<std::string, MetricBlock>> blocks;
  // scenario set name -> audit rows (present when expert models ran)
  std::map<std::string, std::vector<FeatureAuditRow>> feature_audit;
};

nlohmann::ordered_json report_to_json(const EvalReport& report);

// mean and sample standard deviation of one metric across runs
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// predictor -> scenario set -> metric name -> mean/std across runs
using AggregateTable =
    std::map<std::string,
             std::map<std::string, std::map<std::string, MeanStd>>>;

AggregateTable aggregate_reports(const std::vector<EvalReport>& reports);
nlohmann::ordered_json aggregate_to_json(const AggregateTable& aggregate);

// Plot-ready flat CSVs: per-dataset rows (true/pred accuracies with
// both intervals) and per-scenario absolute errors.
std::string per_dataset_csv(const std::vector<EvalReport>& reports);
std::string abs_error_csv(const std::vector<EvalReport>& reports);
// Aggregate table for one metric, predictors as columns ("mean+-std").
std::string aggregate_metric_csv(const AggregateTable& aggregate,
                                 const std::string& metric);

}  // namespace drift
