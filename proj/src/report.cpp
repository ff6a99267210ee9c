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

#include "drift/report.hpp"

#include <cmath>
#include <sstream>

namespace drift {

namespace {

nlohmann::ordered_json interval_to_json(const Interval& ci) {
  return {ci.lo, ci.hi};
}

nlohmann::ordered_json row_to_json(const DatasetRow& row) {
  nlohmann::ordered_json j;
  j["scenario"] = row.scenario_id;
  j["shift_kind"] = row.shift_kind;
  j["severity"] = row.severity;
  j["feature_fraction"] = row.feature_fraction;
  j["n"] = row.n;
  j["true_acc"] = row.true_acc;
  j["true_ci"] = interval_to_json(row.true_ci);
  j["pred_acc"] = row.pred_acc;
  j["pred_ci"] = interval_to_json(row.pred_ci);
  j["abs_err"] = row.abs_err;
  return j;
}

nlohmann::ordered_json block_to_json(const MetricBlock& block) {
  nlohmann::ordered_json j;
  j["k"] = block.k;
  j["mae"] = block.mae;
  j["mae_ci"] = block.mae_ci;
  j["acc_ci"] = block.acc_ci;
  j["picp"] = block.picp;
  j["mpiw"] = block.mpiw;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const DatasetRow& row : block.rows) rows.push_back(row_to_json(row));
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "report_v1";
  j["run"] = report.run_index;
  j["seed"] = report.seed;
  j["alpha"] = report.alpha;
  j["source_accuracy"] = report.source_accuracy;
  if (report.has_atc) {
    j["atc_threshold"] = report.atc_threshold;
  }
  j["predictors"] = report.predictor_names;
  nlohmann::ordered_json blocks;
  for (const std::string& name : report.predictor_names) {
    nlohmann::ordered_json sets;
    for (const auto& [set_name, block] : report.blocks.at(name)) {
      sets[set_name] = block_to_json(block);
    }
    blocks[name] = std::move(sets);
  }
  j["blocks"] = std::move(blocks);

  nlohmann::ordered_json audit;
  for (const auto& [set_name, rows] : report.feature_audit) {
    nlohmann::ordered_json set_audit = nlohmann::ordered_json::array();
    for (const FeatureAuditRow& row : rows) {
      nlohmann::ordered_json features = nlohmann::ordered_json::array();
      for (const DriftFeature& f : row.features) {
        features.push_back(
            {{"name", f.name}, {"tag", provenance_name(f.tag)},
             {"value", f.value}});
      }
      set_audit.push_back(
          {{"scenario", row.scenario_id}, {"features", std::move(features)}});
    }
    audit[set_name] = std::move(set_audit);
  }
  j["drift_features"] = std::move(audit);
  return j;
}

AggregateTable aggregate_reports(const std::vector<EvalReport>& reports) {
  AggregateTable table;
  if (reports.empty()) return table;
  for (const std::string& name : reports.front().predictor_names) {
    for (const auto& [set_name, first_block] : reports.front().blocks.at(name)) {
      const auto metrics = {
          std::pair<const char*, double MetricBlock::*>{"mae", &MetricBlock::mae},
          {"mae_ci", &MetricBlock::mae_ci},
          {"acc_ci", &MetricBlock::acc_ci},
          {"picp", &MetricBlock::picp},
          {"mpiw", &MetricBlock::mpiw}};
      for (const auto& [metric_name, member] : metrics) {
        double sum = 0.0, sum_sq = 0.0;
        std::size_t count = 0;
        for (const EvalReport& report : reports) {
          const auto pred_it = report.blocks.find(name);
          if (pred_it == report.blocks.end()) continue;
          const auto set_it = pred_it->second.find(set_name);
          if (set_it == pred_it->second.end()) continue;
          const double v = set_it->second.*member;
          sum += v;
          sum_sq += v * v;
          ++count;
        }
        MeanStd ms;
        if (count > 0) {
          ms.mean = sum / static_cast<double>(count);
          if (count > 1) {
            const double var =
                (sum_sq - sum * sum / static_cast<double>(count)) /
                static_cast<double>(count - 1);
            ms.std = var > 0.0 ? std::sqrt(var) : 0.0;
          }
        }
        table[name][set_name][metric_name] = ms;
      }
    }
  }
  return table;
}

nlohmann::ordered_json aggregate_to_json(const AggregateTable& aggregate) {
  nlohmann::ordered_json j;
  j["schema"] = "aggregate_v1";
  nlohmann::ordered_json body;
  for (const auto& [pred, sets] : aggregate) {
    nlohmann::ordered_json sets_json;
    for (const auto& [set_name, metrics] : sets) {
      nlohmann::ordered_json metrics_json;
      for (const auto& [metric, ms] : metrics) {
        metrics_json[metric] = {{"mean", ms.mean}, {"std", ms.std}};
      }
      sets_json[set_name] = std::move(metrics_json);
    }
    body[pred] = std::move(sets_json);
  }
  j["metrics"] = std::move(body);
  return j;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string per_dataset_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "run,predictor,scenario_set,scenario,shift_kind,severity,"
         "feature_fraction,n,true_acc,true_lo,true_hi,pred_acc,pred_lo,"
         "pred_hi,abs_err\n";
  for (const EvalReport& report : reports) {
    for (const std::string& name : report.predictor_names) {
      for (const auto& [set_name, block] : report.blocks.at(name)) {
        for (const DatasetRow& row : block.rows) {
          out << report.run_index << ',' << name << ',' << set_name << ','
              << row.scenario_id << ',' << row.shift_kind << ','
              << format_double(row.severity) << ','
              << format_double(row.feature_fraction) << ',' << row.n << ','
              << format_double(row.true_acc) << ','
              << format_double(row.true_ci.lo) << ','
              << format_double(row.true_ci.hi) << ','
              << format_double(row.pred_acc) << ','
              << format_double(row.pred_ci.lo) << ','
              << format_double(row.pred_ci.hi) << ','
              << format_double(row.abs_err) << '\n';
        }
      }
    }
  }
  return out.str();
}

std::string abs_error_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "run,predictor,scenario_set,scenario,abs_err\n";
  for (const EvalReport& report : reports) {
    for (const std::string& name : report.predictor_names) {
      for (const auto& [set_name, block] : report.blocks.at(name)) {
        for (const DatasetRow& row : block.rows) {
          out << report.run_index << ',' << name << ',' << set_name << ','
              << row.scenario_id << ',' << format_double(row.abs_err) << '\n';
        }
      }
    }
  }
  return out.str();
}

std::string aggregate_metric_csv(const AggregateTable& aggregate,
                                 const std::string& metric) {
  std::ostringstream out;
  out << "scenario_set";
  for (const auto& [pred, sets] : aggregate) out << ',' << pred;
  out << '\n';
  std::vector<std::string> set_names;
  if (!aggregate.empty()) {
    for (const auto& [set_name, metrics] : aggregate.begin()->second) {
      set_names.push_back(set_name);
    }
  }
  for (const std::string& set_name : set_names) {
    out << set_name;
    for (const auto& [pred, sets] : aggregate) {
      const auto it = sets.find(set_name);
      if (it == sets.end()) {
        out << ',';
        continue;
      }
      const MeanStd& ms = it->second.at(metric);
      out << ',' << format_double(ms.mean) << "+-" << format_double(ms.std);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace drift
