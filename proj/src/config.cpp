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

#include "drift/config.hpp"

#include <fstream>
#include <set>

namespace drift {

namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError("'" + where + "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

std::pair<double, double> get_range(const Json& j, const char* key,
                                    std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError(std::string("'") + key + "' must be [lo, hi]");
  }
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

std::vector<ShiftKind> get_kinds(const Json& j, const char* key,
                                 std::vector<ShiftKind> fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<ShiftKind> kinds;
  for (const auto& name : j.at(key)) {
    kinds.push_back(parse_shift_kind(name.get<std::string>()));
  }
  return kinds;
}

ForestParams get_forest(const Json& j, const char* key, ForestParams fallback,
                        const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& f = j.at(key);
  require_keys(f, {"n_trees", "max_depth", "min_leaf", "features_per_split"},
               where + "." + key);
  ForestParams params = fallback;
  params.n_trees = get_or(f, "n_trees", params.n_trees);
  params.max_depth = get_or(f, "max_depth", params.max_depth);
  params.min_leaf = get_or(f, "min_leaf", params.min_leaf);
  params.features_per_split =
      get_or(f, "features_per_split", params.features_per_split);
  return params;
}

Json forest_to_json(const ForestParams& params) {
  return {{"n_trees", params.n_trees},
          {"max_depth", params.max_depth},
          {"min_leaf", params.min_leaf},
          {"features_per_split", params.features_per_split}};
}

Json kinds_to_json(const std::vector<ShiftKind>& kinds) {
  Json out = Json::array();
  for (ShiftKind kind : kinds) out.push_back(shift_kind_name(kind));
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  require_keys(j, {"dataset", "protocol", "predictors", "output", "seed"},
               "config");
  ExperimentConfig config;

  if (!j.contains("dataset")) throw ConfigError("config requires 'dataset'");
  const Json& ds = j.at("dataset");
  require_keys(ds, {"path", "label", "columns", "split"}, "dataset");
  config.dataset_path = ds.at("path").get<std::string>();
  config.label = ds.at("label").get<std::string>();
  if (!ds.contains("columns")) {
    throw ConfigError("dataset requires 'columns' (name -> kind)");
  }
  for (const auto& [name, kind] : ds.at("columns").items()) {
    const std::string k = kind.get<std::string>();
    if (k != "numeric" && k != "categorical") {
      throw ConfigError("column '" + name + "' has unknown kind '" + k + "'");
    }
    config.schema[name] =
        k == "numeric" ? ColumnKind::kNumeric : ColumnKind::kCategorical;
  }
  if (ds.contains("split")) {
    const Json& split = ds.at("split");
    require_keys(split, {"variable", "source", "targets"}, "dataset.split");
    SplitPlan plan;
    plan.split_variable = split.at("variable").get<std::string>();
    plan.source_value = split.at("source").get<std::string>();
    if (split.contains("targets")) {
      for (const auto& group : split.at("targets")) {
        plan.target_groups.push_back(group.get<std::vector<std::string>>());
      }
    }
    config.split = std::move(plan);
  }

  if (j.contains("protocol")) {
    const Json& p = j.at("protocol");
    require_keys(p,
                 {"n_samples", "runs", "scenarios_per_kind", "train_kinds",
                  "unseen_shift_kinds", "subpop_kinds", "severity_train",
                  "severity_unseen", "severity_other", "feature_range",
                  "alpha", "percent", "calibration_fraction", "primary_forest",
                  "domain_forest", "expert_regressor"},
                 "protocol");
    Protocol& proto = config.protocol;
    proto.n_samples = get_or<std::size_t>(p, "n_samples", proto.n_samples);
    proto.runs = get_or<std::size_t>(p, "runs", proto.runs);
    proto.scenarios_per_kind =
        get_or<std::size_t>(p, "scenarios_per_kind", proto.scenarios_per_kind);
    proto.train_kinds = get_kinds(p, "train_kinds", proto.train_kinds);
    proto.unseen_shift_kinds =
        get_kinds(p, "unseen_shift_kinds", proto.unseen_shift_kinds);
    proto.subpop_kinds = get_kinds(p, "subpop_kinds", proto.subpop_kinds);
    proto.severity_train =
        get_range(p, "severity_train", proto.severity_train);
    proto.severity_unseen =
        get_range(p, "severity_unseen", proto.severity_unseen);
    proto.severity_other =
        get_range(p, "severity_other", proto.severity_other);
    proto.feature_range = get_range(p, "feature_range", proto.feature_range);
    proto.alpha = get_or(p, "alpha", proto.alpha);
    proto.percent = get_or(p, "percent", proto.percent);
    proto.calibration_fraction =
        get_or(p, "calibration_fraction", proto.calibration_fraction);
    proto.primary_forest =
        get_forest(p, "primary_forest", proto.primary_forest, "protocol");
    proto.domain_forest =
        get_forest(p, "domain_forest", proto.domain_forest, "protocol");
    proto.expert_regressor =
        get_forest(p, "expert_regressor", proto.expert_regressor, "protocol");
  }
  config.protocol.validate();

  if (j.contains("predictors")) {
    config.roster.clear();
    for (const auto& item : j.at("predictors")) {
      require_keys(item,
                   {"kind", "name", "score", "forest", "k", "max_rows",
                    "calibration_fraction"},
                   "predictors[]");
      PredictorConfig pred;
      pred.kind = parse_predictor_kind(item.at("kind").get<std::string>());
      pred.name = get_or<std::string>(item, "name",
                                      predictor_kind_name(pred.kind));
      if (item.contains("score")) {
        const std::string score = item.at("score").get<std::string>();
        if (score == "neg_entropy") {
          pred.atc_score = AtcScoreKind::kNegEntropy;
        } else if (score == "max_confidence") {
          pred.atc_score = AtcScoreKind::kMaxConfidence;
        } else {
          throw ConfigError("unknown ATC score '" + score + "'");
        }
      }
      pred.error_params.forest = get_forest(item, "forest",
                                            pred.error_params.forest,
                                            "predictors[]");
      pred.error_params.knn_k =
          get_or<std::size_t>(item, "k", pred.error_params.knn_k);
      pred.error_params.max_rows =
          get_or<std::size_t>(item, "max_rows", pred.error_params.max_rows);
      pred.error_params.calibration_fraction =
          get_or(item, "calibration_fraction",
                 pred.error_params.calibration_fraction);
      if (pred.error_params.calibration_fraction < 0.0 ||
          pred.error_params.calibration_fraction >= 1.0) {
        throw ConfigError("calibration_fraction must lie in [0, 1)");
      }
      config.roster.push_back(std::move(pred));
    }
    if (config.roster.empty()) {
      throw ConfigError("predictor roster is empty");
    }
  }

  if (j.contains("output")) {
    const Json& out = j.at("output");
    require_keys(out, {"dir", "save_models"}, "output");
    config.output_dir = get_or<std::string>(out, "dir", config.output_dir);
    config.save_models = get_or(out, "save_models", config.save_models);
  }
  config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
  return config;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  Json j;
  Json ds;
  ds["path"] = config.dataset_path;
  ds["label"] = config.label;
  Json columns;
  // canonical order: sorted column names
  std::map<std::string, ColumnKind> sorted(config.schema.begin(),
                                           config.schema.end());
  for (const auto& [name, kind] : sorted) {
    columns[name] = kind == ColumnKind::kNumeric ? "numeric" : "categorical";
  }
  ds["columns"] = std::move(columns);
  if (config.split) {
    Json split;
    split["variable"] = config.split->split_variable;
    split["source"] = config.split->source_value;
    Json targets = Json::array();
    for (const auto& group : config.split->target_groups) {
      targets.push_back(group);
    }
    split["targets"] = std::move(targets);
    ds["split"] = std::move(split);
  }
  j["dataset"] = std::move(ds);

  const Protocol& proto = config.protocol;
  Json p;
  p["n_samples"] = proto.n_samples;
  p["runs"] = proto.runs;
  p["scenarios_per_kind"] = proto.scenarios_per_kind;
  p["train_kinds"] = kinds_to_json(proto.train_kinds);
  p["unseen_shift_kinds"] = kinds_to_json(proto.unseen_shift_kinds);
  p["subpop_kinds"] = kinds_to_json(proto.subpop_kinds);
  p["severity_train"] = {proto.severity_train.first,
                         proto.severity_train.second};
  p["severity_unseen"] = {proto.severity_unseen.first,
                          proto.severity_unseen.second};
  p["severity_other"] = {proto.severity_other.first,
                         proto.severity_other.second};
  p["feature_range"] = {proto.feature_range.first, proto.feature_range.second};
  p["alpha"] = proto.alpha;
  p["percent"] = proto.percent;
  p["calibration_fraction"] = proto.calibration_fraction;
  p["primary_forest"] = forest_to_json(proto.primary_forest);
  p["domain_forest"] = forest_to_json(proto.domain_forest);
  p["expert_regressor"] = forest_to_json(proto.expert_regressor);
  j["protocol"] = std::move(p);

  Json predictors = Json::array();
  for (const PredictorConfig& pred : config.roster) {
    Json item;
    item["kind"] = predictor_kind_name(pred.kind);
    item["name"] = pred.name.empty() ? predictor_kind_name(pred.kind)
                                     : pred.name;
    if (pred.kind == PredictorKind::kAtc) {
      item["score"] = pred.atc_score == AtcScoreKind::kNegEntropy
                          ? "neg_entropy"
                          : "max_confidence";
    }
    if (pred.kind == PredictorKind::kErrorPredictorRF ||
        pred.kind == PredictorKind::kErrorPredictorRFNoShift ||
        pred.kind == PredictorKind::kErrorPredictorKnn) {
      item["forest"] = forest_to_json(pred.error_params.forest);
      item["k"] = pred.error_params.knn_k;
      item["max_rows"] = pred.error_params.max_rows;
      item["calibration_fraction"] = pred.error_params.calibration_fraction;
    }
    predictors.push_back(std::move(item));
  }
  j["predictors"] = std::move(predictors);

  Json out;
  out["dir"] = config.output_dir;
  out["save_models"] = config.save_models;
  j["output"] = std::move(out);
  j["seed"] = config.seed;
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.is_object() && j.contains("schema") &&
        j.at("schema") == "manifest_v1") {
      return config_from_json(j.at("config"));
    }
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

std::string config_hash(const Json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) h = (h ^ c) * 0x100000001b3ull;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::ordered_json make_manifest(const ExperimentConfig& config) {
  Json j;
  j["schema"] = "manifest_v1";
  j["tool"] = "driftbench";
  j["tool_version"] = kToolVersion;
  const Json resolved = config_to_json(config);
  j["config_hash"] = config_hash(resolved);
  j["seed"] = config.seed;
  j["config"] = resolved;
  return j;
}

}  // namespace drift
