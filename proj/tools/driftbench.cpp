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

// Command-line front end: simulate shifts on CSV data, run the full
// performance-predictor benchmark, and score deployment batches with
// saved models.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "drift/blobs.hpp"
#include "drift/config.hpp"
#include "drift/parallel.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;
using drift::ConfigError;
using drift::DriftError;
using Json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DriftError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Output root: --out flag > config dir (if absolute) > $DRIFTBENCH_OUT
// root + config dir.
fs::path resolve_out_dir(const std::string& flag_out,
                         const std::string& config_dir) {
  if (!flag_out.empty()) return flag_out;
  fs::path dir(config_dir);
  if (dir.is_absolute()) return dir;
  const char* root = std::getenv("DRIFTBENCH_OUT");
  return root != nullptr ? fs::path(root) / dir : dir;
}

drift::Schema schema_from_flag(const std::string& flag,
                               const std::string& csv_path) {
  if (flag.empty()) return drift::infer_schema(csv_path);
  drift::Schema schema;
  std::stringstream ss(flag);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) {
      throw ConfigError("schema entries must look like name:kind");
    }
    const std::string name = item.substr(0, colon);
    const std::string kind = item.substr(colon + 1);
    if (kind == "numeric") {
      schema[name] = drift::ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      schema[name] = drift::ColumnKind::kCategorical;
    } else {
      throw ConfigError("unknown column kind '" + kind + "'");
    }
  }
  return schema;
}

int cmd_shift(const std::string& input, const std::string& output,
              const std::string& kind_name, double samples, double features,
              double percent, std::uint64_t seed, const std::string& schema_flag,
              const std::string& label) {
  drift::Schema schema = schema_from_flag(schema_flag, input);
  schema[label] = drift::ColumnKind::kCategorical;
  const drift::Dataset ds = drift::load_csv(input, schema, label);

  drift::ShiftSpec spec;
  spec.kind = drift::parse_shift_kind(kind_name);
  spec.sample_fraction = samples;
  spec.feature_fraction = features;
  spec.percent = percent;
  spec.seed = seed;
  spec.validate();

  const drift::ShiftedDataset shifted = drift::apply_shift(ds, spec);
  drift::write_csv(shifted.data, output, label);

  Json sidecar;
  sidecar["schema"] = "shift_sidecar_v1";
  sidecar["input"] = input;
  sidecar["kind"] = drift::shift_kind_name(spec.kind);
  sidecar["sample_fraction"] = spec.sample_fraction;
  sidecar["feature_fraction"] = spec.feature_fraction;
  sidecar["percent"] = spec.percent;
  sidecar["seed"] = spec.seed;
  sidecar["rows_in"] = ds.n_rows();
  sidecar["rows_out"] = shifted.data.n_rows();
  sidecar["affected_rows"] = shifted.affected_rows;
  Json cols = Json::array();
  for (std::size_t c : shifted.affected_features) {
    cols.push_back(ds.columns()[c].name);
  }
  sidecar["affected_features"] = std::move(cols);
  write_json(output + ".shift.json", sidecar);
  std::cout << "wrote " << output << " (" << shifted.data.n_rows()
            << " rows)\n";
  return 0;
}

void save_models(const fs::path& dir, const drift::ExperimentConfig& config,
                 const drift::FittedModels& models) {
  fs::create_directories(dir);
  write_json(dir / "primary.json", models.primary->to_json());
  drift::write_csv(models.reference, (dir / "reference.csv").string(),
                   config.label);

  Json manifest;
  manifest["schema"] = "models_v1";
  manifest["tool_version"] = drift::kToolVersion;
  manifest["label"] = config.label;
  manifest["alpha"] = config.protocol.alpha;
  manifest["source_accuracy"] = models.source_accuracy;
  Json columns;
  std::map<std::string, drift::ColumnKind> sorted(config.schema.begin(),
                                                  config.schema.end());
  for (const auto& [name, kind] : sorted) {
    columns[name] =
        kind == drift::ColumnKind::kNumeric ? "numeric" : "categorical";
  }
  manifest["columns"] = std::move(columns);
  if (config.split) {
    manifest["dropped_column"] = config.split->split_variable;
  }
  Json domain = {{"n_trees", config.protocol.domain_forest.n_trees},
                 {"max_depth", config.protocol.domain_forest.max_depth},
                 {"min_leaf", config.protocol.domain_forest.min_leaf},
                 {"features_per_split",
                  config.protocol.domain_forest.features_per_split}};
  manifest["domain_forest"] = std::move(domain);
  Json predictors = Json::array();

  if (models.has_atc) {
    Json atc;
    atc["type"] = "atc";
    atc["version"] = 1;
    atc["threshold"] = models.atc.threshold;
    atc["score"] = models.atc.score_kind == drift::AtcScoreKind::kNegEntropy
                       ? "neg_entropy"
                       : "max_confidence";
    write_json(dir / "ATC.json", atc);
    predictors.push_back("ATC");
  }
  for (const auto& [name, model] : models.experts) {
    write_json(dir / (name + ".json"), model.to_json());
    predictors.push_back(name);
  }
  for (const auto& [name, model] : models.errors) {
    write_json(dir / (name + ".json"), model.to_json());
    predictors.push_back(name);
  }
  manifest["predictors"] = std::move(predictors);
  write_json(dir / "models.json", manifest);
}

int cmd_bench(const std::string& config_path, const std::string& out_flag,
              std::uint64_t seed_flag, bool seed_given, int jobs,
              bool dry_run) {
  drift::ExperimentConfig config = drift::load_config_file(config_path);
  if (seed_given) config.seed = seed_flag;
  if (jobs > 0) drift::set_max_threads(jobs);

  const drift::Protocol& proto = config.protocol;
  if (dry_run) {
    const std::size_t per_kind = proto.scenarios_per_kind;
    std::cout << "dry run for '" << config_path << "'\n"
              << "  runs: " << proto.runs << "\n"
              << "  n_samples: " << proto.n_samples << "\n"
              << "  train scenarios: " << proto.train_kinds.size() << " x "
              << per_kind << " = " << proto.train_kinds.size() * per_kind
              << "\n"
              << "  unseen_severity scenarios: "
              << proto.train_kinds.size() * per_kind << "\n"
              << "  unseen_shift scenarios: "
              << proto.unseen_shift_kinds.size() * per_kind << "\n"
              << "  unseen_subpop_shift scenarios: "
              << proto.subpop_kinds.size() * per_kind << "\n"
              << "  no_shift scenarios: " << per_kind << "\n"
              << "  natural scenarios: "
              << (config.split ? "one per target domain" : "none (no split)")
              << "\n"
              << "  predictors:";
    for (const auto& pred : config.roster) std::cout << ' ' << pred.name;
    std::cout << "\n";
    return 0;
  }

  const fs::path out_dir = resolve_out_dir(out_flag, config.output_dir);
  fs::create_directories(out_dir);

  const drift::Dataset ds =
      drift::load_csv(config.dataset_path, config.schema, config.label);

  drift::FittedModels models;
  const drift::BenchmarkResult result =
      drift::run_benchmark(ds, config.split, proto, config.roster, config.seed,
                           config.save_models ? &models : nullptr);

  write_json(out_dir / "manifest.json", drift::make_manifest(config));
  for (const drift::EvalReport& report : result.reports) {
    write_json(out_dir /
                   ("report_run" + std::to_string(report.run_index) + ".json"),
               drift::report_to_json(report));
  }
  write_json(out_dir / "aggregate.json",
             drift::aggregate_to_json(result.aggregate));
  for (const char* metric : {"mae", "mae_ci", "acc_ci", "picp", "mpiw"}) {
    write_text(out_dir / ("aggregate_" + std::string(metric) + ".csv"),
               drift::aggregate_metric_csv(result.aggregate, metric));
  }
  write_text(out_dir / "per_dataset.csv", drift::per_dataset_csv(result.reports));
  write_text(out_dir / "abs_error.csv", drift::abs_error_csv(result.reports));

  if (!result.failures.empty()) {
    Json failures = Json::array();
    for (const drift::RunFailure& f : result.failures) {
      failures.push_back({{"run", f.run_index}, {"error", f.error}});
    }
    write_json(out_dir / "failures.json", failures);
  }
  if (config.save_models && !result.reports.empty()) {
    save_models(out_dir / "models", config, models);
  }

  std::cout << "completed " << result.reports.size() << "/" << proto.runs
            << " runs -> " << out_dir.string() << "\n";
  for (const drift::RunFailure& f : result.failures) {
    std::cerr << "run " << f.run_index << " failed: " << f.error << "\n";
  }
  return result.failures.empty() ? 0 : 1;
}

int cmd_predict(const std::string& model_dir, const std::string& target_csv,
                const std::string& predictor_name, std::uint64_t seed) {
  const fs::path dir(model_dir);
  std::ifstream manifest_in(dir / "models.json");
  if (!manifest_in) {
    throw ConfigError("no models.json under '" + model_dir + "'");
  }
  const Json manifest = Json::parse(manifest_in);
  if (manifest.at("schema") != "models_v1") {
    throw ConfigError("unsupported models manifest schema");
  }

  drift::Schema schema;
  for (const auto& [name, kind] : manifest.at("columns").items()) {
    schema[name] = kind.get<std::string>() == "numeric"
                       ? drift::ColumnKind::kNumeric
                       : drift::ColumnKind::kCategorical;
  }
  const std::string label = manifest.at("label").get<std::string>();

  std::ifstream primary_in(dir / "primary.json");
  if (!primary_in) throw ConfigError("missing primary.json");
  const std::unique_ptr<drift::ProbClassifier> primary =
      drift::classifier_from_json(Json::parse(primary_in));

  // the target batch may or may not carry the label column; drop it
  // (and the split variable) when present
  drift::Schema target_schema = drift::infer_schema(target_csv);
  for (auto& [name, kind] : target_schema) {
    if (schema.count(name)) kind = schema.at(name);
  }
  drift::FeatureTable target =
      drift::load_features_csv(target_csv, target_schema);
  for (const std::string drop :
       {label, manifest.contains("dropped_column")
                   ? manifest.at("dropped_column").get<std::string>()
                   : std::string()}) {
    if (drop.empty()) continue;
    if (const auto col = target.column_index(drop)) {
      target = target.drop_column(*col);
    }
  }
  if (target.n_rows() == 0) {
    throw drift::SizeError("target CSV '" + target_csv + "' has no rows");
  }

  const fs::path predictor_path = dir / (predictor_name + ".json");
  std::ifstream predictor_in(predictor_path);
  if (!predictor_in) {
    throw ConfigError("predictor '" + predictor_name + "' not found in '" +
                      model_dir + "'");
  }
  const Json predictor_json = Json::parse(predictor_in);
  const drift::EvalConfig cfg(manifest.at("alpha").get<double>());

  drift::AccuracyPrediction prediction;
  const std::string type = predictor_json.at("type").get<std::string>();
  if (type == "atc") {
    drift::AtcModel atc;
    atc.threshold = predictor_json.at("threshold").get<double>();
    atc.score_kind = predictor_json.at("score") == "neg_entropy"
                         ? drift::AtcScoreKind::kNegEntropy
                         : drift::AtcScoreKind::kMaxConfidence;
    prediction = drift::atc_predict(atc, primary->predict_proba(target));
  } else if (type == "expert_model") {
    const drift::ExpertModel expert =
        drift::ExpertModel::from_json(predictor_json);
    const drift::Dataset reference = drift::load_csv(
        (dir / "reference.csv").string(), schema, label);
    drift::DriftFeatureContext ctx;
    ctx.primary = primary.get();
    ctx.source_valid = &reference;
    const Json& domain = manifest.at("domain_forest");
    ctx.domain_forest.n_trees = domain.at("n_trees").get<int>();
    ctx.domain_forest.max_depth = domain.at("max_depth").get<int>();
    ctx.domain_forest.min_leaf = domain.at("min_leaf").get<int>();
    ctx.domain_forest.features_per_split =
        domain.at("features_per_split").get<int>();
    prediction = expert.predict(ctx, target, primary->predict_proba(target),
                                seed);
  } else if (type == "error_predictor") {
    const drift::ErrorPredictorModel model =
        drift::ErrorPredictorModel::from_json(predictor_json);
    prediction = model.predict(*primary, target);
  } else {
    throw ConfigError("unknown predictor type '" + type + "'");
  }

  const drift::Interval interval = prediction.interval(cfg);
  Json out;
  out["predictor"] = predictor_name;
  out["n"] = prediction.n;
  out["a_hat"] = prediction.value;
  out["sigma_hat"] = prediction.sigma();
  out["alpha"] = cfg.alpha;
  out["interval"] = {interval.lo, interval.hi};
  out["source_accuracy"] = manifest.at("source_accuracy").get<double>();
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_gen_blobs(const std::string& out, std::size_t rows,
                  std::uint64_t seed) {
  const drift::Dataset ds = drift::make_synthetic_blobs(rows, seed);
  drift::write_csv(ds, out, "label");
  std::cout << "wrote " << out << " (" << rows << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dataset-shift benchmark for model performance predictors"};
  app.require_subcommand(1);

  // shift
  auto* shift = app.add_subcommand("shift", "apply one shift to a CSV");
  std::string shift_in, shift_out, shift_kind, shift_schema, shift_label =
      "label";
  double shift_samples = 1.0, shift_features = 1.0, shift_percent = 0.1;
  std::uint64_t shift_seed = 0;
  shift->add_option("--input", shift_in, "input CSV")->required();
  shift->add_option("--out", shift_out, "output CSV")->required();
  shift->add_option("--kind", shift_kind, "shift kind identifier")->required();
  shift->add_option("--samples", shift_samples, "sample fraction s in [0,1]");
  shift->add_option("--features", shift_features,
                    "feature fraction f in [0,1]");
  shift->add_option("--percent", shift_percent,
                    "percent p for PlusMinusSomePercent");
  shift->add_option("--seed", shift_seed, "rng seed");
  shift->add_option("--schema", shift_schema,
                    "comma list name:kind; inferred when omitted");
  shift->add_option("--label", shift_label, "label column name");

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark protocol");
  std::string bench_config, bench_out;
  std::uint64_t bench_seed = 0;
  int bench_jobs = 0;
  bool bench_dry = false;
  bench->add_option("--config", bench_config, "experiment config JSON")
      ->required();
  auto* bench_seed_opt =
      bench->add_option("--seed", bench_seed, "override config seed");
  bench->add_option("--jobs", bench_jobs, "worker threads (0 = default)");
  bench->add_option("--out", bench_out, "override output directory");
  bench->add_flag("--dry-run", bench_dry, "print planned scenario counts");

  // predict
  auto* predict =
      app.add_subcommand("predict", "score a target batch with saved models");
  std::string predict_models, predict_target,
      predict_name = "ErrorPredictorRF";
  std::uint64_t predict_seed = 0;
  predict->add_option("--models", predict_models, "models directory")
      ->required();
  predict->add_option("--target", predict_target, "target CSV")->required();
  predict->add_option("--predictor", predict_name, "predictor to use");
  predict->add_option("--seed", predict_seed,
                      "seed for randomized drift features");

  // gen-blobs
  auto* gen = app.add_subcommand("gen-blobs",
                                 "write the bundled synthetic dataset");
  std::string gen_out = "synth_blobs.csv";
  std::size_t gen_rows = 9000;
  std::uint64_t gen_seed = 20260101;
  gen->add_option("--out", gen_out, "output CSV");
  gen->add_option("--rows", gen_rows, "row count");
  gen->add_option("--seed", gen_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (shift->parsed()) {
      return cmd_shift(shift_in, shift_out, shift_kind, shift_samples,
                       shift_features, shift_percent, shift_seed, shift_schema,
                       shift_label);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_config, bench_out, bench_seed,
                       bench_seed_opt->count() > 0, bench_jobs, bench_dry);
    }
    if (predict->parsed()) {
      return cmd_predict(predict_models, predict_target, predict_name,
                         predict_seed);
    }
    if (gen->parsed()) {
      return cmd_gen_blobs(gen_out, gen_rows, gen_seed);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const drift::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const DriftError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
