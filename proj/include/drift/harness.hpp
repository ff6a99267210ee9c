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
#include <optional>

#include "drift/meta.hpp"
#include "drift/predictors.hpp"
#include "drift/report.hpp"

namespace drift {

// Full experimental protocol: pool sizes, scenario budgets, shift kind
// pools per scenario family, severity ranges, and model defaults.
struct Protocol {
  std::size_t n_samples = 500;
  std::size_t runs = 10;
  std::size_t scenarios_per_kind = 100;

  // Five train slots; the slots are drawn as given (repeats allowed),
  // by default a second Outliers tier fills the fifth slot.
  std::vector<ShiftKind> train_kinds = {
      ShiftKind::kSwappedValues, ShiftKind::kScaling, ShiftKind::kOutliers,
      ShiftKind::kMissingValues, ShiftKind::kOutliers};
  std::vector<ShiftKind> unseen_shift_kinds = {
      ShiftKind::kSmallGaussian, ShiftKind::kMediumGaussian,
      ShiftKind::kFlipSign, ShiftKind::kConstantNumeric,
      ShiftKind::kPlusMinusSomePercent};
  std::vector<ShiftKind> subpop_kinds = {
      ShiftKind::kJointSubsampling, ShiftKind::kSubsamplingNumeric,
      ShiftKind::kSubsamplingCategorical, ShiftKind::kKnockOut};

  std::pair<double, double> severity_train{0.75, 0.95};
  std::pair<double, double> severity_unseen{0.25, 0.74};
  std::pair<double, double> severity_other{0.25, 0.95};
  std::pair<double, double> feature_range{0.25, 0.95};
  double alpha = 0.05;
  double percent = 0.1;

  double calibration_fraction = 0.2;
  ForestParams primary_forest{100, 0, 1, 0, 0};
  ForestParams domain_forest{50, 8, 20, 0, 0};
  ForestParams expert_regressor{100, 0, 1, 0, 0};

  void validate() const;  // throws ConfigError
};

enum class PredictorKind {
  kAtc,
  kExpertRedyuk,
  kExpertElsahar,
  kErrorPredictorRF,
  kErrorPredictorRFNoShift,
  kErrorPredictorKnn,
};

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kErrorPredictorRF;
  std::string name;  // defaults to the canonical display name
  AtcScoreKind atc_score = AtcScoreKind::kNegEntropy;
  ErrorPredictorParams error_params;
};

const std::string& predictor_kind_name(PredictorKind kind);
PredictorKind parse_predictor_kind(const std::string& name);

using Roster = std::vector<PredictorConfig>;
Roster default_roster();

// Calibrated primary model plus bookkeeping.
struct PrimaryBundle {
  std::shared_ptr<const ProbClassifier> model;
  double source_accuracy = 0.0;  // on primary_valid
};

// Fits the primary forest on 80% of primary_train and Platt-calibrates
// on the held-out 20%.
PrimaryBundle fit_primary(const Pools& pools, const Protocol& proto,
                          std::uint64_t seed);

// Builds all six scenario families. Train scenarios draw clean data
// from source_pool, test scenarios from primary_target, natural
// scenarios from the given split domains (n_samples rows each, whole
// domain when smaller). Every entry's accuracy is measured by scoring
// the primary on the withheld labels. Scenario generation runs under
// parallel_for with per-scenario derived seeds; reference::
// build_meta_sets is the serial twin.
std::map<ScenarioKind, MetaSet> build_meta_sets(
    const Pools& pools, const ProbClassifier& primary, const Protocol& proto,
    const std::vector<Dataset>& natural_targets, std::uint64_t seed);

namespace reference {
std::map<ScenarioKind, MetaSet> build_meta_sets(
    const Pools& pools, const ProbClassifier& primary, const Protocol& proto,
    const std::vector<Dataset>& natural_targets, std::uint64_t seed);
}  // namespace reference

// Identity-shift training scenarios drawn from the source pool; the
// training signal of the no-augmentation error predictor variant.
MetaSet build_identity_train_set(const Pools& pools,
                                 const ProbClassifier& primary,
                                 const Protocol& proto, std::uint64_t seed);

// Fitted artifacts of one run, exported so the CLI can persist them
// for later predict invocations.
struct FittedModels {
  std::shared_ptr<const ProbClassifier> primary;
  double source_accuracy = 0.0;
  Dataset reference;  // primary_valid, the drift-metric reference set
  bool has_atc = false;
  AtcModel atc;
  std::map<std::string, ExpertModel> experts;
  std::map<std::string, ErrorPredictorModel> errors;
};

// One full run: pools, primary, meta-sets, predictor fits, evaluation.
// When models_out is given, the fitted predictors are moved into it.
EvalReport run_one(const Dataset& source, const Protocol& proto,
                   const Roster& roster,
                   const std::vector<Dataset>& natural_targets, int run_index,
                   std::uint64_t run_seed, FittedModels* models_out = nullptr);

struct RunFailure {
  int run_index = 0;
  std::string error;
};

struct BenchmarkResult {
  std::vector<EvalReport> reports;
  std::vector<RunFailure> failures;
  AggregateTable aggregate;
};

// Applies the split plan (when given), then executes proto.runs
// seed-derived runs and aggregates mean/std per metric. Run 0's fitted
// models are exported through run0_models when requested.
BenchmarkResult run_benchmark(const Dataset& ds,
                              const std::optional<SplitPlan>& plan,
                              const Protocol& proto, const Roster& roster,
                              std::uint64_t seed,
                              FittedModels* run0_models = nullptr);

// Error-predictor sensitivity to the number of training shift types:
// refits on every size-k slot combination and reports the MAE per
// scenario set for each combination.
struct ShiftTypeCurvePoint {
  std::size_t k = 0;
  std::vector<std::string> kinds;
  std::map<std::string, double> mae;  // scenario set -> MAE
};

std::vector<ShiftTypeCurvePoint> sensitivity_shift_types(
    const Dataset& ds, const std::optional<SplitPlan>& plan,
    const Protocol& proto, std::size_t max_kinds,
    const ErrorPredictorParams& error_params, std::uint64_t seed);

// Error-predictor sensitivity to the number of training domains per
// shift type.
struct DomainCurvePoint {
  std::size_t m = 0;
  std::map<std::string, double> mae;
};

std::vector<DomainCurvePoint> sensitivity_domains_per_kind(
    const Dataset& ds, const std::optional<SplitPlan>& plan,
    const Protocol& proto, const std::vector<std::size_t>& domain_counts,
    const ErrorPredictorParams& error_params, std::uint64_t seed);

// Compares shift-augmented vs clean-trained error predictors across the
// requested backends; one metric block per variant per scenario set.
std::map<std::string, std::map<std::string, MetricBlock>>
error_predictor_ablation(const Dataset& ds,
                         const std::optional<SplitPlan>& plan,
                         const Protocol& proto,
                         const std::vector<ErrorBackend>& backends,
                         std::uint64_t seed);

}  // namespace drift
