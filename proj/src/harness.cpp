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

#include "drift/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "drift/parallel.hpp"
#include "drift/rng.hpp"

namespace drift {

namespace {

const std::array<std::pair<ScenarioKind, const char*>, 6> kScenarioNames = {{
    {ScenarioKind::kTrain, "train"},
    {ScenarioKind::kUnseenSeverity, "unseen_severity"},
    {ScenarioKind::kUnseenShift, "unseen_shift"},
    {ScenarioKind::kUnseenSubpopShift, "unseen_subpop_shift"},
    {ScenarioKind::kNatural, "natural"},
    {ScenarioKind::kNoShift, "no_shift"},
}};

const std::array<std::pair<PredictorKind, const char*>, 6> kPredictorNames = {{
    {PredictorKind::kAtc, "ATC"},
    {PredictorKind::kExpertRedyuk, "ExpertRF_Redyuk"},
    {PredictorKind::kExpertElsahar, "ExpertRF_Elsahar"},
    {PredictorKind::kErrorPredictorRF, "ErrorPredictorRF"},
    {PredictorKind::kErrorPredictorRFNoShift, "ErrorPredictorRF_no_shift"},
    {PredictorKind::kErrorPredictorKnn, "ErrorPredictorKNN"},
}};

double measure_accuracy(const ProbClassifier& primary, const Dataset& ds) {
  return primary.accuracy(ds);
}

void check_range(std::pair<double, double> range, const char* what) {
  if (range.first < 0.0 || range.second > 1.0 || range.first > range.second) {
    throw ConfigError(std::string(what) +
                      " range must satisfy 0 <= lo <= hi <= 1");
  }
}

}  // namespace

const std::string& scenario_kind_name(ScenarioKind kind) {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v(kScenarioNames.size());
    for (const auto& [k, name] : kScenarioNames) {
      v[static_cast<std::size_t>(k)] = name;
    }
    return v;
  }();
  return names[static_cast<std::size_t>(kind)];
}

const std::vector<ScenarioKind>& all_scenario_kinds() {
  static const std::vector<ScenarioKind> kinds = [] {
    std::vector<ScenarioKind> v;
    for (const auto& [k, name] : kScenarioNames) v.push_back(k);
    return v;
  }();
  return kinds;
}

const std::string& predictor_kind_name(PredictorKind kind) {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v(kPredictorNames.size());
    for (const auto& [k, name] : kPredictorNames) {
      v[static_cast<std::size_t>(k)] = name;
    }
    return v;
  }();
  return names[static_cast<std::size_t>(kind)];
}

PredictorKind parse_predictor_kind(const std::string& name) {
  for (const auto& [kind, kind_name] : kPredictorNames) {
    if (name == kind_name) return kind;
  }
  throw ConfigError("unknown predictor '" + name + "'");
}

Roster default_roster() {
  Roster roster;
  for (PredictorKind kind :
       {PredictorKind::kAtc, PredictorKind::kExpertRedyuk,
        PredictorKind::kExpertElsahar, PredictorKind::kErrorPredictorRF}) {
    PredictorConfig cfg;
    cfg.kind = kind;
    cfg.name = predictor_kind_name(kind);
    roster.push_back(cfg);
  }
  return roster;
}

void Protocol::validate() const {
  if (n_samples < 4) throw ConfigError("n_samples must be at least 4");
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (scenarios_per_kind < 1) {
    throw ConfigError("scenarios_per_kind must be at least 1");
  }
  if (train_kinds.empty()) throw ConfigError("train kind pool is empty");
  check_range(severity_train, "train severity");
  check_range(severity_unseen, "unseen severity");
  check_range(severity_other, "severity");
  check_range(feature_range, "feature fraction");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  if (percent <= 0.0 || percent > 1.0) {
    throw ConfigError("percent must lie in (0, 1]");
  }
  if (calibration_fraction <= 0.0 || calibration_fraction >= 1.0) {
    throw ConfigError("calibration_fraction must lie in (0, 1)");
  }
  if (primary_forest.n_trees < 1 || domain_forest.n_trees < 1 ||
      expert_regressor.n_trees < 1) {
    throw ConfigError("forest sizes must be at least 1 tree");
  }
}

PrimaryBundle fit_primary(const Pools& pools, const Protocol& proto,
                          std::uint64_t seed) {
  const Dataset& train = pools.primary_train;
  const std::size_t n_calib = std::max<std::size_t>(
      1, fraction_count(proto.calibration_fraction, train.n_rows()));
  Rng rng(derive_seed(seed, "calib-split"));
  auto calib_idx = rng.sample_without_replacement(train.n_rows(), n_calib);
  std::vector<bool> in_calib(train.n_rows(), false);
  for (std::size_t i : calib_idx) in_calib[i] = true;
  std::vector<std::size_t> fit_idx;
  for (std::size_t r = 0; r < train.n_rows(); ++r) {
    if (!in_calib[r]) fit_idx.push_back(r);
  }
  std::sort(calib_idx.begin(), calib_idx.end());

  ForestParams params = proto.primary_forest;
  params.seed = derive_seed(seed, "primary-forest");
  auto forest = std::make_shared<RandomForestClassifier>(params);
  forest->fit(train.take_rows(fit_idx));

  PrimaryBundle bundle;
  bundle.model = platt_calibrate(forest, train.take_rows(calib_idx));
  bundle.source_accuracy =
      measure_accuracy(*bundle.model, pools.primary_valid);
  return bundle;
}

namespace {

struct ScenarioPlan {
  ScenarioKind set = ScenarioKind::kTrain;
  ShiftKind kind = ShiftKind::kIdentity;
  std::size_t slot = 0;
  std::string id;
  const Dataset* pool = nullptr;    // clean draw source
  const Dataset* domain = nullptr;  // natural target domain
  std::pair<double, double> severity{0.0, 1.0};
};

// Train entries are flattened slot-major: entry index = slot *
// scenarios_per_kind + j. The sensitivity sweeps rely on this layout.
std::vector<ScenarioPlan> plan_scenarios(
    const Pools& pools, const Protocol& proto,
    const std::vector<Dataset>& natural_targets) {
  std::vector<ScenarioPlan> plans;
  const auto add_synthetic = [&](ScenarioKind set,
                                 const std::vector<ShiftKind>& kinds,
                                 std::pair<double, double> severity,
                                 const Dataset& pool) {
    for (std::size_t slot = 0; slot < kinds.size(); ++slot) {
      for (std::size_t j = 0; j < proto.scenarios_per_kind; ++j) {
        ScenarioPlan plan;
        plan.set = set;
        plan.kind = kinds[slot];
        plan.slot = slot;
        plan.id = scenario_kind_name(set) + "/" + shift_kind_name(kinds[slot]) +
                  "#" + std::to_string(slot) + "/" + std::to_string(j);
        plan.pool = &pool;
        plan.severity = severity;
        plans.push_back(std::move(plan));
      }
    }
  };

  add_synthetic(ScenarioKind::kTrain, proto.train_kinds, proto.severity_train,
                pools.source_pool);
  add_synthetic(ScenarioKind::kUnseenSeverity, proto.train_kinds,
                proto.severity_unseen, pools.primary_target);
  add_synthetic(ScenarioKind::kUnseenShift, proto.unseen_shift_kinds,
                proto.severity_other, pools.primary_target);
  add_synthetic(ScenarioKind::kUnseenSubpopShift, proto.subpop_kinds,
                proto.severity_other, pools.primary_target);
  add_synthetic(ScenarioKind::kNoShift, {ShiftKind::kIdentity},
                {0.0, 0.0}, pools.primary_target);

  for (std::size_t i = 0; i < natural_targets.size(); ++i) {
    ScenarioPlan plan;
    plan.set = ScenarioKind::kNatural;
    plan.kind = ShiftKind::kIdentity;
    plan.slot = 0;
    plan.id = "natural/domain" + std::to_string(i);
    plan.domain = &natural_targets[i];
    plans.push_back(std::move(plan));
  }
  return plans;
}

MetaEntry build_scenario(const ScenarioPlan& plan, const Protocol& proto,
                         const ProbClassifier& primary, std::uint64_t seed) {
  try {
    Dataset clean;
    if (plan.domain != nullptr) {
      // natural domains smaller than n_samples are used whole
      clean = plan.domain->n_rows() > proto.n_samples
                  ? sample_rows(*plan.domain, proto.n_samples,
                                derive_seed(seed, "draw"))
                  : *plan.domain;
    } else {
      clean = sample_rows(*plan.pool, proto.n_samples,
                          derive_seed(seed, "draw"));
    }
    ShiftSpec spec;
    if (plan.kind == ShiftKind::kIdentity) {
      spec.kind = ShiftKind::kIdentity;
      spec.seed = derive_seed(seed, "apply");
    } else {
      spec = sample_spec({plan.kind}, plan.severity, proto.feature_range,
                         proto.percent, derive_seed(seed, "spec"));
    }
    MetaEntry entry;
    entry.shifted = apply_shift(clean, spec);
    entry.true_accuracy = measure_accuracy(primary, entry.shifted.data);
    entry.n = entry.shifted.data.n_rows();
    entry.scenario_id = plan.id;
    return entry;
  } catch (const DriftError& e) {
    throw DriftError("scenario " + plan.id + ": " + e.what());
  }
}

template <typename ForFn>
std::map<ScenarioKind, MetaSet> build_meta_sets_impl(
    const Pools& pools, const ProbClassifier& primary, const Protocol& proto,
    const std::vector<Dataset>& natural_targets, std::uint64_t seed,
    ForFn&& for_fn) {
  proto.validate();
  const auto plans = plan_scenarios(pools, proto, natural_targets);
  std::vector<MetaEntry> entries(plans.size());
  for_fn(plans.size(), [&](std::size_t i) {
    entries[i] =
        build_scenario(plans[i], proto, primary, derive_seed(seed, plans[i].id));
  });

  std::map<ScenarioKind, MetaSet> sets;
  for (ScenarioKind kind : all_scenario_kinds()) {
    sets[kind].kind = kind;
  }
  for (std::size_t i = 0; i < plans.size(); ++i) {
    sets[plans[i].set].entries.push_back(std::move(entries[i]));
  }
  if (natural_targets.empty()) sets.erase(ScenarioKind::kNatural);
  return sets;
}

}  // namespace

std::map<ScenarioKind, MetaSet> build_meta_sets(
    const Pools& pools, const ProbClassifier& primary, const Protocol& proto,
    const std::vector<Dataset>& natural_targets, std::uint64_t seed) {
  return build_meta_sets_impl(pools, primary, proto, natural_targets, seed,
                              [](std::size_t n, auto&& body) {
                                parallel_for(n, body);
                              });
}

namespace reference {

std::map<ScenarioKind, MetaSet> build_meta_sets(
    const Pools& pools, const ProbClassifier& primary, const Protocol& proto,
    const std::vector<Dataset>& natural_targets, std::uint64_t seed) {
  return build_meta_sets_impl(pools, primary, proto, natural_targets, seed,
                              [](std::size_t n, auto&& body) {
                                serial_for(n, body);
                              });
}

}  // namespace reference

MetaSet build_identity_train_set(const Pools& pools,
                                 const ProbClassifier& primary,
                                 const Protocol& proto, std::uint64_t seed) {
  MetaSet set;
  set.kind = ScenarioKind::kNoShift;
  set.entries.resize(proto.scenarios_per_kind);
  parallel_for(proto.scenarios_per_kind, [&](std::size_t j) {
    ScenarioPlan plan;
    plan.set = ScenarioKind::kNoShift;
    plan.kind = ShiftKind::kIdentity;
    plan.id = "identity_train/" + std::to_string(j);
    plan.pool = &pools.source_pool;
    set.entries[j] =
        build_scenario(plan, proto, primary, derive_seed(seed, plan.id));
  });
  return set;
}

namespace {

// Everything precomputed once per meta entry for predictor evaluation.
struct SetEval {
  std::vector<ProbabilityMatrix> probs;
  std::vector<std::vector<double>> redyuk;
  std::vector<std::vector<double>> elsahar;
  std::vector<DriftFeatureVector> audit;
};

struct RosterNeeds {
  bool atc = false;
  bool redyuk = false;
  bool elsahar = false;
  bool error_rf = false;
  bool error_noshift = false;
  bool error_knn = false;

  bool any_error_predictor() const {
    return error_rf || error_noshift || error_knn;
  }
};

RosterNeeds roster_needs(const Roster& roster) {
  RosterNeeds needs;
  for (const PredictorConfig& cfg : roster) {
    switch (cfg.kind) {
      case PredictorKind::kAtc: needs.atc = true; break;
      case PredictorKind::kExpertRedyuk: needs.redyuk = true; break;
      case PredictorKind::kExpertElsahar: needs.elsahar = true; break;
      case PredictorKind::kErrorPredictorRF: needs.error_rf = true; break;
      case PredictorKind::kErrorPredictorRFNoShift:
        needs.error_noshift = true;
        break;
      case PredictorKind::kErrorPredictorKnn: needs.error_knn = true; break;
    }
  }
  return needs;
}

SetEval precompute_set(const MetaSet& set, const ProbClassifier& primary,
                       const DriftFeatureContext& ctx, const RosterNeeds& needs,
                       std::uint64_t seed) {
  SetEval eval;
  const std::size_t n = set.entries.size();
  eval.probs.resize(n);
  if (needs.redyuk) eval.redyuk.resize(n);
  if (needs.elsahar) eval.elsahar.resize(n);
  if (needs.redyuk || needs.elsahar) eval.audit.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const MetaEntry& entry = set.entries[i];
    const FeatureTable& table = entry.shifted.data.features();
    eval.probs[i] = primary.predict_proba(table);
    const std::uint64_t entry_seed = derive_seed(seed, entry.scenario_id);
    DriftFeatureVector audit;
    if (needs.redyuk) {
      DriftFeatureVector features =
          extract_drift_features(ExtractorKind::kRedyukPercentiles, ctx, table,
                                 eval.probs[i], entry_seed);
      eval.redyuk[i] = feature_values(features);
      audit.insert(audit.end(), features.begin(), features.end());
    }
    if (needs.elsahar) {
      DriftFeatureVector features =
          extract_drift_features(ExtractorKind::kElsaharMetrics, ctx, table,
                                 eval.probs[i], entry_seed);
      eval.elsahar[i] = feature_values(features);
      audit.insert(audit.end(), features.begin(), features.end());
    }
    if (!audit.empty()) eval.audit[i] = std::move(audit);
  });
  return eval;
}

MetricBlock make_block(const MetaSet& set, const std::vector<double>& preds,
                       const EvalConfig& cfg) {
  MetricBlock block;
  const std::size_t k = set.entries.size();
  block.k = k;
  std::vector<double> true_accs(k), pred_accs(k);
  std::vector<std::size_t> ns(k);
  block.rows.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const MetaEntry& entry = set.entries[i];
    true_accs[i] = entry.true_accuracy;
    pred_accs[i] = preds[i];
    ns[i] = entry.n;
    DatasetRow& row = block.rows[i];
    row.scenario_id = entry.scenario_id;
    row.shift_kind = shift_kind_name(entry.shifted.spec.kind);
    row.severity = entry.shifted.spec.sample_fraction;
    row.feature_fraction = entry.shifted.spec.feature_fraction;
    row.n = entry.n;
    row.true_acc = entry.true_accuracy;
    row.true_ci = confidence_interval(entry.true_accuracy, entry.n, cfg);
    row.pred_acc = preds[i];
    row.pred_ci = AccuracyPrediction{preds[i], entry.n}.interval(cfg);
    row.abs_err = std::abs(entry.true_accuracy - preds[i]);
  }
  block.mae = mean_absolute_error(true_accs, pred_accs);
  block.mae_ci = mae_ci(true_accs, pred_accs, ns, cfg);
  block.acc_ci = acc_ci(true_accs, pred_accs, ns, cfg);
  const auto [picp, mpiw] = picp_mpiw(true_accs, pred_accs, ns, cfg);
  block.picp = picp;
  block.mpiw = mpiw;
  return block;
}

FittedModels fit_roster(const Roster& roster, const PrimaryBundle& primary,
                        const Pools& pools,
                        const std::map<ScenarioKind, MetaSet>& meta,
                        const SetEval& train_eval,
                        const MetaSet* identity_train,
                        const Protocol& proto, std::uint64_t seed) {
  FittedModels fitted;
  const MetaSet& train = meta.at(ScenarioKind::kTrain);
  std::vector<double> train_accs(train.entries.size());
  for (std::size_t i = 0; i < train.entries.size(); ++i) {
    train_accs[i] = train.entries[i].true_accuracy;
  }

  for (const PredictorConfig& cfg : roster) {
    switch (cfg.kind) {
      case PredictorKind::kAtc: {
        const ProbabilityMatrix probs =
            primary.model->predict_proba(pools.primary_valid.features());
        const auto scores = atc_scores(probs, cfg.atc_score);
        std::vector<bool> correct(probs.n_rows());
        for (std::size_t r = 0; r < probs.n_rows(); ++r) {
          correct[r] = probs.argmax(r) == pools.primary_valid.labels()[r];
        }
        fitted.atc = atc_fit(scores, correct, cfg.atc_score);
        fitted.has_atc = true;
        break;
      }
      case PredictorKind::kExpertRedyuk:
      case PredictorKind::kExpertElsahar: {
        const bool redyuk = cfg.kind == PredictorKind::kExpertRedyuk;
        ForestParams params = proto.expert_regressor;
        params.seed = derive_seed(seed, "expert/" + cfg.name);
        ExpertModel model(redyuk ? ExtractorKind::kRedyukPercentiles
                                 : ExtractorKind::kElsaharMetrics,
                          params);
        model.fit(redyuk ? train_eval.redyuk : train_eval.elsahar, train_accs);
        fitted.experts.emplace(cfg.name, std::move(model));
        break;
      }
      case PredictorKind::kErrorPredictorRF:
      case PredictorKind::kErrorPredictorKnn: {
        // augmentation: the clean identity draws plus every shifted
        // training dataset
        std::vector<const Dataset*> pool;
        for (const MetaEntry& entry : identity_train->entries) {
          pool.push_back(&entry.shifted.data);
        }
        for (const MetaEntry& entry : train.entries) {
          pool.push_back(&entry.shifted.data);
        }
        ErrorPredictorParams params = cfg.error_params;
        params.backend = cfg.kind == PredictorKind::kErrorPredictorKnn
                             ? ErrorBackend::kKnn
                             : ErrorBackend::kRandomForest;
        ErrorPredictorModel model =
            error_predictor_fit(*primary.model, pool, params,
                                derive_seed(seed, "error/" + cfg.name));
        model.anchor(*primary.model, pools.primary_valid);
        fitted.errors.emplace(cfg.name, std::move(model));
        break;
      }
      case PredictorKind::kErrorPredictorRFNoShift: {
        std::vector<const Dataset*> pool;
        for (const MetaEntry& entry : identity_train->entries) {
          pool.push_back(&entry.shifted.data);
        }
        ErrorPredictorParams params = cfg.error_params;
        params.backend = ErrorBackend::kRandomForest;
        ErrorPredictorModel model =
            error_predictor_fit(*primary.model, pool, params,
                                derive_seed(seed, "error/" + cfg.name));
        model.anchor(*primary.model, pools.primary_valid);
        fitted.errors.emplace(cfg.name, std::move(model));
        break;
      }
    }
  }
  return fitted;
}

std::vector<double> evaluate_predictor(const PredictorConfig& cfg,
                                       const FittedModels& fitted,
                                       const MetaSet& set,
                                       const SetEval& eval) {
  std::vector<double> preds(set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    switch (cfg.kind) {
      case PredictorKind::kAtc:
        preds[i] = atc_predict(fitted.atc, eval.probs[i]).value;
        break;
      case PredictorKind::kExpertRedyuk:
        preds[i] = fitted.experts.at(cfg.name).predict_from_features(
            eval.redyuk[i]);
        break;
      case PredictorKind::kExpertElsahar:
        preds[i] = fitted.experts.at(cfg.name).predict_from_features(
            eval.elsahar[i]);
        break;
      case PredictorKind::kErrorPredictorRF:
      case PredictorKind::kErrorPredictorRFNoShift:
      case PredictorKind::kErrorPredictorKnn:
        preds[i] = fitted.errors.at(cfg.name)
                       .predict(set.entries[i].shifted.data.features(),
                                eval.probs[i])
                       .value;
        break;
    }
  }
  return preds;
}

Roster named_roster(Roster roster) {
  for (PredictorConfig& cfg : roster) {
    if (cfg.name.empty()) cfg.name = predictor_kind_name(cfg.kind);
  }
  std::set<std::string> names;
  for (const PredictorConfig& cfg : roster) {
    if (!names.insert(cfg.name).second) {
      throw ConfigError("duplicate predictor name '" + cfg.name + "'");
    }
  }
  return roster;
}

}  // namespace

EvalReport run_one(const Dataset& source, const Protocol& proto,
                   const Roster& roster_in,
                   const std::vector<Dataset>& natural_targets, int run_index,
                   std::uint64_t run_seed, FittedModels* models_out) {
  proto.validate();
  const Roster roster = named_roster(roster_in);
  const RosterNeeds needs = roster_needs(roster);

  const Pools pools =
      make_pools(source, proto.n_samples, derive_seed(run_seed, "pools"));
  const PrimaryBundle primary =
      fit_primary(pools, proto, derive_seed(run_seed, "primary"));
  const auto meta = build_meta_sets(pools, *primary.model, proto,
                                    natural_targets,
                                    derive_seed(run_seed, "meta"));

  MetaSet identity_train;
  if (needs.any_error_predictor()) {
    identity_train = build_identity_train_set(
        pools, *primary.model, proto, derive_seed(run_seed, "noshift-train"));
  }

  DriftFeatureContext ctx;
  ctx.primary = primary.model.get();
  ctx.source_valid = &pools.primary_valid;
  ctx.domain_forest = proto.domain_forest;

  std::map<ScenarioKind, SetEval> evals;
  for (const auto& [kind, set] : meta) {
    evals[kind] = precompute_set(set, *primary.model, ctx, needs,
                                 derive_seed(run_seed, "features"));
  }

  FittedModels fitted =
      fit_roster(roster, primary, pools, meta, evals.at(ScenarioKind::kTrain),
                 needs.any_error_predictor() ? &identity_train : nullptr,
                 proto, derive_seed(run_seed, "fit"));

  EvalReport report;
  report.run_index = run_index;
  report.seed = run_seed;
  report.alpha = proto.alpha;
  report.source_accuracy = primary.source_accuracy;
  report.has_atc = fitted.has_atc;
  report.atc_threshold = fitted.has_atc ? fitted.atc.threshold : 0.0;
  const EvalConfig cfg(proto.alpha);
  for (const PredictorConfig& pred_cfg : roster) {
    report.predictor_names.push_back(pred_cfg.name);
    for (const auto& [kind, set] : meta) {
      const auto preds =
          evaluate_predictor(pred_cfg, fitted, set, evals.at(kind));
      report.blocks[pred_cfg.name][scenario_kind_name(kind)] =
          make_block(set, preds, cfg);
    }
  }
  if (needs.redyuk || needs.elsahar) {
    for (const auto& [kind, set] : meta) {
      auto& audit = report.feature_audit[scenario_kind_name(kind)];
      const SetEval& eval = evals.at(kind);
      for (std::size_t i = 0; i < set.entries.size(); ++i) {
        audit.push_back({set.entries[i].scenario_id, eval.audit[i]});
      }
    }
  }
  if (models_out != nullptr) {
    fitted.primary = primary.model;
    fitted.source_accuracy = primary.source_accuracy;
    fitted.reference = pools.primary_valid;
    *models_out = std::move(fitted);
  }
  return report;
}

BenchmarkResult run_benchmark(const Dataset& ds,
                              const std::optional<SplitPlan>& plan,
                              const Protocol& proto, const Roster& roster,
                              std::uint64_t seed, FittedModels* run0_models) {
  proto.validate();
  Dataset source = ds;
  std::vector<Dataset> natural_targets;
  if (plan) {
    SplitResult split = split_by_variable(ds, *plan);
    source = std::move(split.source);
    natural_targets = std::move(split.targets);
  }

  BenchmarkResult result;
  for (std::size_t run = 0; run < proto.runs; ++run) {
    try {
      result.reports.push_back(
          run_one(source, proto, roster, natural_targets,
                  static_cast<int>(run), derive_seed(seed, run),
                  run == 0 ? run0_models : nullptr));
    } catch (const DriftError& e) {
      result.failures.push_back({static_cast<int>(run), e.what()});
    }
  }
  result.aggregate = aggregate_reports(result.reports);
  return result;
}

namespace {

// Shared setup for the sensitivity sweeps: one run's pools, primary,
// meta-sets and per-set primary probabilities (no expert features).
struct SweepContext {
  Pools pools;
  PrimaryBundle primary;
  std::map<ScenarioKind, MetaSet> meta;
  std::map<ScenarioKind, SetEval> evals;
};

SweepContext make_sweep_context(const Dataset& ds,
                                const std::optional<SplitPlan>& plan,
                                const Protocol& proto, std::uint64_t seed) {
  Dataset source = ds;
  std::vector<Dataset> natural_targets;
  if (plan) {
    SplitResult split = split_by_variable(ds, *plan);
    source = std::move(split.source);
    natural_targets = std::move(split.targets);
  }
  SweepContext ctx;
  ctx.pools = make_pools(source, proto.n_samples, derive_seed(seed, "pools"));
  ctx.primary = fit_primary(ctx.pools, proto, derive_seed(seed, "primary"));
  ctx.meta = build_meta_sets(ctx.pools, *ctx.primary.model, proto,
                             natural_targets, derive_seed(seed, "meta"));
  const RosterNeeds plain{};
  DriftFeatureContext fctx;
  fctx.primary = ctx.primary.model.get();
  fctx.source_valid = &ctx.pools.primary_valid;
  for (const auto& [kind, set] : ctx.meta) {
    ctx.evals[kind] = precompute_set(set, *ctx.primary.model, fctx, plain,
                                     derive_seed(seed, "features"));
  }
  return ctx;
}

std::map<std::string, double> evaluate_error_predictor_mae(
    const SweepContext& ctx, const ErrorPredictorModel& model) {
  std::map<std::string, double> mae;
  for (const auto& [kind, set] : ctx.meta) {
    std::vector<double> true_accs(set.entries.size());
    std::vector<double> preds(set.entries.size());
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
      true_accs[i] = set.entries[i].true_accuracy;
      preds[i] = model
                     .predict(set.entries[i].shifted.data.features(),
                              ctx.evals.at(kind).probs[i])
                     .value;
    }
    mae[scenario_kind_name(kind)] = mean_absolute_error(true_accs, preds);
  }
  return mae;
}

std::vector<const Dataset*> slot_pool(const MetaSet& train,
                                      const std::vector<std::size_t>& slots,
                                      std::size_t scenarios_per_kind) {
  std::vector<const Dataset*> pool;
  for (std::size_t slot : slots) {
    for (std::size_t j = 0; j < scenarios_per_kind; ++j) {
      pool.push_back(
          &train.entries[slot * scenarios_per_kind + j].shifted.data);
    }
  }
  return pool;
}

}  // namespace

std::vector<ShiftTypeCurvePoint> sensitivity_shift_types(
    const Dataset& ds, const std::optional<SplitPlan>& plan,
    const Protocol& proto, std::size_t max_kinds,
    const ErrorPredictorParams& error_params, std::uint64_t seed) {
  proto.validate();
  if (max_kinds < 1 || max_kinds > proto.train_kinds.size()) {
    throw ConfigError("max_kinds must lie in [1, " +
                      std::to_string(proto.train_kinds.size()) + "]");
  }
  // combination budget: sum of C(slots, k) for k = 1..max_kinds
  std::size_t budget = 0;
  const std::size_t slots = proto.train_kinds.size();
  for (std::size_t k = 1; k <= max_kinds; ++k) {
    std::size_t comb = 1;
    for (std::size_t i = 0; i < k; ++i) comb = comb * (slots - i) / (i + 1);
    budget += comb;
  }
  constexpr std::size_t kMaxCombinations = 512;
  if (budget > kMaxCombinations) {
    throw ConfigError("shift-type sweep needs " + std::to_string(budget) +
                      " combinations, limit is " +
                      std::to_string(kMaxCombinations));
  }

  const SweepContext ctx = make_sweep_context(ds, plan, proto, seed);
  const MetaSet& train = ctx.meta.at(ScenarioKind::kTrain);

  std::vector<ShiftTypeCurvePoint> curve;
  for (std::size_t k = 1; k <= max_kinds; ++k) {
    std::vector<bool> mask(slots, false);
    std::fill(mask.end() - static_cast<long>(k), mask.end(), true);
    // iterate combinations via std::next_permutation over the mask
    do {
      std::vector<std::size_t> chosen;
      for (std::size_t s = 0; s < slots; ++s) {
        if (mask[s]) chosen.push_back(s);
      }
      ShiftTypeCurvePoint point;
      point.k = k;
      std::string combo_tag;
      for (std::size_t s : chosen) {
        point.kinds.push_back(shift_kind_name(proto.train_kinds[s]));
        combo_tag += std::to_string(s) + ",";
      }
      const auto pool = slot_pool(train, chosen, proto.scenarios_per_kind);
      ErrorPredictorModel model = error_predictor_fit(
          *ctx.primary.model, pool, error_params,
          derive_seed(seed, "combo/" + combo_tag));
      model.anchor(*ctx.primary.model, ctx.pools.primary_valid);
      point.mae = evaluate_error_predictor_mae(ctx, model);
      curve.push_back(std::move(point));
    } while (std::next_permutation(mask.begin(), mask.end()));
  }
  return curve;
}

std::vector<DomainCurvePoint> sensitivity_domains_per_kind(
    const Dataset& ds, const std::optional<SplitPlan>& plan,
    const Protocol& proto, const std::vector<std::size_t>& domain_counts,
    const ErrorPredictorParams& error_params, std::uint64_t seed) {
  proto.validate();
  for (std::size_t m : domain_counts) {
    if (m == 0) throw ConfigError("domain count m must be at least 1");
    if (m > proto.scenarios_per_kind) {
      throw ConfigError("domain count " + std::to_string(m) +
                        " exceeds scenarios_per_kind " +
                        std::to_string(proto.scenarios_per_kind));
    }
  }
  const SweepContext ctx = make_sweep_context(ds, plan, proto, seed);
  const MetaSet& train = ctx.meta.at(ScenarioKind::kTrain);
  const std::size_t slots = proto.train_kinds.size();

  std::vector<DomainCurvePoint> curve;
  for (std::size_t m : domain_counts) {
    std::vector<const Dataset*> pool;
    for (std::size_t slot = 0; slot < slots; ++slot) {
      Rng rng(derive_seed(seed, "domains/" + std::to_string(m) + "/" +
                                    std::to_string(slot)));
      auto picks =
          rng.sample_without_replacement(proto.scenarios_per_kind, m);
      std::sort(picks.begin(), picks.end());
      for (std::size_t j : picks) {
        pool.push_back(
            &train.entries[slot * proto.scenarios_per_kind + j].shifted.data);
      }
    }
    // the fit seed is shared across m so m = scenarios_per_kind
    // reproduces the full training exactly
    ErrorPredictorModel model = error_predictor_fit(
        *ctx.primary.model, pool, error_params, derive_seed(seed, "domains-fit"));
    model.anchor(*ctx.primary.model, ctx.pools.primary_valid);
    DomainCurvePoint point;
    point.m = m;
    point.mae = evaluate_error_predictor_mae(ctx, model);
    curve.push_back(std::move(point));
  }
  return curve;
}

std::map<std::string, std::map<std::string, MetricBlock>>
error_predictor_ablation(const Dataset& ds,
                         const std::optional<SplitPlan>& plan,
                         const Protocol& proto,
                         const std::vector<ErrorBackend>& backends,
                         std::uint64_t seed) {
  proto.validate();
  const SweepContext ctx = make_sweep_context(ds, plan, proto, seed);
  const MetaSet& train = ctx.meta.at(ScenarioKind::kTrain);
  const MetaSet identity_train = build_identity_train_set(
      ctx.pools, *ctx.primary.model, proto, derive_seed(seed, "noshift-train"));

  // augmented = clean draws plus shifted training data; the baseline
  // variant sees the clean draws only
  std::vector<const Dataset*> augmented_pool, clean_pool;
  for (const MetaEntry& entry : identity_train.entries) {
    clean_pool.push_back(&entry.shifted.data);
    augmented_pool.push_back(&entry.shifted.data);
  }
  for (const MetaEntry& entry : train.entries) {
    augmented_pool.push_back(&entry.shifted.data);
  }

  const EvalConfig cfg(proto.alpha);
  std::map<std::string, std::map<std::string, MetricBlock>> result;
  for (ErrorBackend backend : backends) {
    const std::string backend_name =
        backend == ErrorBackend::kRandomForest ? "RF" : "KNN";
    for (const bool augmented : {true, false}) {
      ErrorPredictorParams params;
      params.backend = backend;
      const std::string variant = "ErrorPredictor" + backend_name +
                                  (augmented ? "" : "_no_shift");
      ErrorPredictorModel model = error_predictor_fit(
          *ctx.primary.model, augmented ? augmented_pool : clean_pool, params,
          derive_seed(seed, "ablation/" + variant));
      model.anchor(*ctx.primary.model, ctx.pools.primary_valid);
      for (const auto& [kind, set] : ctx.meta) {
        std::vector<double> preds(set.entries.size());
        for (std::size_t i = 0; i < set.entries.size(); ++i) {
          preds[i] = model
                         .predict(set.entries[i].shifted.data.features(),
                                  ctx.evals.at(kind).probs[i])
                         .value;
        }
        result[variant][scenario_kind_name(kind)] =
            make_block(set, preds, cfg);
      }
    }
  }
  return result;
}

}  // namespace drift
