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

#include "drift/predictors.hpp"

#include <algorithm>
#include <cmath>

#include "drift/rng.hpp"

namespace drift {

std::vector<double> atc_scores(const ProbabilityMatrix& probs,
                               AtcScoreKind kind) {
  std::vector<double> scores(probs.n_rows());
  for (std::size_t r = 0; r < probs.n_rows(); ++r) {
    scores[r] = kind == AtcScoreKind::kNegEntropy ? probs.neg_entropy(r)
                                                  : probs.max_prob(r);
  }
  return scores;
}

AtcModel atc_fit(std::span<const double> scores,
                 const std::vector<bool>& correct, AtcScoreKind kind) {
  if (scores.empty() || scores.size() != correct.size()) {
    throw SizeError("atc_fit requires equally sized non-empty inputs");
  }
  const double n = static_cast<double>(scores.size());
  double error_rate = 0.0;
  for (bool c : correct) error_rate += c ? 0.0 : 1.0;
  error_rate /= n;

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<double> candidates;
  candidates.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    candidates.push_back((sorted[i] + sorted[i + 1]) / 2.0);
  }
  candidates.push_back(std::numeric_limits<double>::infinity());

  AtcModel model;
  model.score_kind = kind;
  double best = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    double below = 0.0;
    for (double s : scores) below += s < t ? 1.0 : 0.0;
    const double residual = std::abs(below / n - error_rate);
    if (residual < best) {  // ties keep the smallest threshold
      best = residual;
      model.threshold = t;
    }
  }
  return model;
}

AccuracyPrediction atc_predict(const AtcModel& model,
                               const ProbabilityMatrix& target_probs) {
  if (target_probs.n_rows() == 0) throw SizeError("atc_predict on empty target");
  const auto scores = atc_scores(target_probs, model.score_kind);
  double above = 0.0;
  for (double s : scores) above += s >= model.threshold ? 1.0 : 0.0;
  return AccuracyPrediction{above / static_cast<double>(scores.size()),
                            scores.size()};
}

void ExpertModel::fit(const std::vector<std::vector<double>>& features,
                      const std::vector<double>& accuracies) {
  if (features.size() < 2) {
    throw SizeError("expert model requires at least 2 meta-datasets, got " +
                    std::to_string(features.size()));
  }
  regressor_.fit(features, accuracies);
  fitted_ = true;
}

double ExpertModel::predict_from_features(
    const std::vector<double>& features) const {
  if (!fitted_) throw DriftError("predict on unfitted expert model");
  const double raw = regressor_.predict({features})[0];
  return std::clamp(raw, 0.0, 1.0);
}

AccuracyPrediction ExpertModel::predict(const DriftFeatureContext& ctx,
                                        const FeatureTable& target,
                                        const ProbabilityMatrix& target_probs,
                                        std::uint64_t seed) const {
  const DriftFeatureVector features =
      extract_drift_features(extractor_, ctx, target, target_probs, seed);
  return AccuracyPrediction{predict_from_features(feature_values(features)),
                            target.n_rows()};
}

nlohmann::ordered_json ExpertModel::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "expert_model";
  j["version"] = 1;
  j["extractor"] = extractor_name(extractor_);
  j["regressor"] = regressor_.to_json();
  return j;
}

ExpertModel ExpertModel::from_json(const nlohmann::ordered_json& j) {
  ExpertModel model;
  model.extractor_ = j.at("extractor").get<std::string>() ==
                             extractor_name(ExtractorKind::kRedyukPercentiles)
                         ? ExtractorKind::kRedyukPercentiles
                         : ExtractorKind::kElsaharMetrics;
  model.regressor_ =
      std::move(*RandomForestRegressor::from_json(j.at("regressor")));
  model.fitted_ = true;
  return model;
}

ExpertModel expert_fit(const MetaSet& meta_train, ExtractorKind extractor,
                       const DriftFeatureContext& ctx,
                       ForestParams regressor_params, std::uint64_t seed) {
  if (meta_train.entries.size() < 2) {
    throw SizeError("expert_fit requires at least 2 meta-datasets");
  }
  std::vector<std::vector<double>> features(meta_train.entries.size());
  std::vector<double> accs(meta_train.entries.size());
  for (std::size_t k = 0; k < meta_train.entries.size(); ++k) {
    const MetaEntry& entry = meta_train.entries[k];
    const FeatureTable& table = entry.shifted.data.features();
    const ProbabilityMatrix probs = ctx.primary->predict_proba(table);
    features[k] = feature_values(extract_drift_features(
        extractor, ctx, table, probs, derive_seed(seed, k)));
    accs[k] = entry.true_accuracy;
  }
  regressor_params.seed = derive_seed(seed, "expert-regressor");
  ExpertModel model(extractor, regressor_params);
  model.fit(features, accs);
  return model;
}

namespace {

// backend training columns: raw features + primary confidence features
std::vector<Column> backend_columns(const std::vector<Column>& raw) {
  std::vector<Column> cols = raw;
  cols.push_back({"__top_prob", ColumnKind::kNumeric, {}});
  cols.push_back({"__margin", ColumnKind::kNumeric, {}});
  return cols;
}

FeatureTable backend_features(const FeatureTable& raw,
                              const ProbabilityMatrix& probs) {
  FeatureTable table(backend_columns(raw.columns()), raw.n_rows());
  for (std::size_t r = 0; r < raw.n_rows(); ++r) {
    for (std::size_t c = 0; c < raw.n_cols(); ++c) {
      table.set(r, c, raw.at(r, c));
    }
    table.set(r, raw.n_cols(), probs.max_prob(r));
    table.set(r, raw.n_cols() + 1, probs.margin(r));
  }
  return table;
}

constexpr const char* kIncorrectClass = "incorrect";
constexpr const char* kCorrectClass = "correct";
constexpr std::size_t kMinCalibrationRows = 50;

}  // namespace

ErrorPredictorModel error_predictor_fit(
    const ProbClassifier& primary,
    const std::vector<const Dataset*>& labeled_sets,
    const ErrorPredictorParams& params, std::uint64_t seed) {
  if (labeled_sets.empty()) {
    throw SizeError("error predictor needs at least one labeled dataset");
  }
  std::size_t total = 0;
  for (const Dataset* ds : labeled_sets) total += ds->n_rows();
  if (total == 0) throw SizeError("error predictor pool is empty");

  // global row subsample, sorted so the kept order is the pool order
  std::vector<bool> keep;
  if (params.max_rows > 0 && total > params.max_rows) {
    Rng rng(derive_seed(seed, "row-cap"));
    auto picks = rng.sample_without_replacement(total, params.max_rows);
    keep.assign(total, false);
    for (std::size_t i : picks) keep[i] = true;
  }

  const std::size_t kept_rows = keep.empty() ? total : params.max_rows;
  FeatureTable pooled(backend_columns(labeled_sets[0]->columns()), kept_rows);
  std::vector<int> targets(kept_rows);
  std::size_t global = 0, out = 0, hits = 0;
  for (const Dataset* ds : labeled_sets) {
    const ProbabilityMatrix probs = primary.predict_proba(ds->features());
    for (std::size_t r = 0; r < ds->n_rows(); ++r, ++global) {
      if (!keep.empty() && !keep[global]) continue;
      for (std::size_t c = 0; c < ds->n_cols(); ++c) {
        pooled.set(out, c, ds->at(r, c));
      }
      pooled.set(out, ds->n_cols(), probs.max_prob(r));
      pooled.set(out, ds->n_cols() + 1, probs.margin(r));
      const bool correct = probs.argmax(r) == ds->labels()[r];
      targets[out] = correct ? 1 : 0;
      hits += correct ? 1u : 0u;
      ++out;
    }
  }

  ErrorPredictorModel model;
  if (hits == 0 || hits == kept_rows) {
    // degenerate pool: the backend has a single class to learn from
    model.constant_ = true;
    model.constant_value_ = hits == 0 ? 0.0 : 1.0;
    return model;
  }

  Dataset train(std::move(pooled), std::move(targets),
                {kIncorrectClass, kCorrectClass});

  // hold out a calibration slice; forest leaf frequencies flatten
  // toward the pool base rate, so the raw scores are remapped to
  // held-out correctness rates
  std::vector<std::size_t> fit_rows(train.n_rows());
  std::iota(fit_rows.begin(), fit_rows.end(), std::size_t{0});
  std::vector<std::size_t> calib_rows;
  const std::size_t want_calib =
      fraction_count(params.calibration_fraction, train.n_rows());
  if (want_calib >= kMinCalibrationRows) {
    Rng rng(derive_seed(seed, "calib-split"));
    calib_rows = rng.sample_without_replacement(train.n_rows(), want_calib);
    std::sort(calib_rows.begin(), calib_rows.end());
    std::vector<bool> held(train.n_rows(), false);
    for (std::size_t r : calib_rows) held[r] = true;
    fit_rows.clear();
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
      if (!held[r]) fit_rows.push_back(r);
    }
  }
  const Dataset backend_train = train.take_rows(fit_rows);

  try {
    if (params.backend == ErrorBackend::kRandomForest) {
      ForestParams forest = params.forest;
      forest.seed = derive_seed(seed, "backend");
      auto backend = std::make_unique<RandomForestClassifier>(forest);
      backend->fit(backend_train);
      model.backend_ = std::move(backend);
    } else {
      auto backend = std::make_unique<KnnClassifier>(
          std::min(params.knn_k, backend_train.n_rows()));
      backend->fit(backend_train);
      model.backend_ = std::move(backend);
    }
  } catch (const DegenerateError&) {
    // the held-out split can strand all errors in the calibration slice
    const double rate = static_cast<double>(hits) /
                        static_cast<double>(kept_rows);
    model.constant_ = true;
    model.constant_value_ = rate;
    return model;
  }

  if (!calib_rows.empty()) {
    const Dataset calib = train.take_rows(calib_rows);
    const ProbabilityMatrix scores =
        model.backend_->predict_proba(calib.features());
    std::vector<std::pair<double, double>> points(calib.n_rows());
    for (std::size_t r = 0; r < calib.n_rows(); ++r) {
      points[r] = {scores.at(r, 1), static_cast<double>(calib.labels()[r])};
    }
    model.calibration_.fit(std::move(points));
  }
  return model;
}

AccuracyPrediction ErrorPredictorModel::predict(
    const FeatureTable& target, const ProbabilityMatrix& target_probs) const {
  if (target.n_rows() == 0) {
    throw SizeError("error predictor target is empty");
  }
  if (constant_) {
    return AccuracyPrediction{constant_value_, target.n_rows()};
  }
  const FeatureTable features = backend_features(target, target_probs);
  const ProbabilityMatrix probs = backend_->predict_proba(features);
  double sum = 0.0;
  for (std::size_t r = 0; r < probs.n_rows(); ++r) {
    sum += calibration_.map(probs.at(r, 1));  // class 1 = correct
  }
  const double mean = sum / static_cast<double>(probs.n_rows());
  return AccuracyPrediction{std::clamp(mean + anchor_offset_, 0.0, 1.0),
                            target.n_rows()};
}

AccuracyPrediction ErrorPredictorModel::predict(
    const ProbClassifier& primary, const FeatureTable& target) const {
  return predict(target, primary.predict_proba(target));
}

void ErrorPredictorModel::anchor(const ProbClassifier& primary,
                                 const Dataset& source_valid) {
  if (constant_) return;
  anchor_offset_ = 0.0;
  const AccuracyPrediction raw = predict(primary, source_valid.features());
  double measured = 0.0;
  const auto labels = primary.predict(source_valid.features());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    measured += labels[r] == source_valid.labels()[r] ? 1.0 : 0.0;
  }
  measured /= static_cast<double>(source_valid.n_rows());
  anchor_offset_ = measured - raw.value;
}

nlohmann::ordered_json ErrorPredictorModel::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "error_predictor";
  j["version"] = 1;
  j["constant"] = constant_;
  j["constant_value"] = constant_value_;
  j["anchor_offset"] = anchor_offset_;
  j["calibration"] = calibration_.fitted()
                         ? calibration_.to_json()
                         : nlohmann::ordered_json(nullptr);
  j["backend"] = constant_ ? nlohmann::ordered_json(nullptr)
                           : backend_->to_json();
  return j;
}

ErrorPredictorModel ErrorPredictorModel::from_json(
    const nlohmann::ordered_json& j) {
  ErrorPredictorModel model;
  model.constant_ = j.at("constant").get<bool>();
  model.constant_value_ = j.at("constant_value").get<double>();
  model.anchor_offset_ = j.at("anchor_offset").get<double>();
  if (!j.at("calibration").is_null()) {
    model.calibration_ = IsotonicCurve::from_json(j.at("calibration"));
  }
  if (!model.constant_) model.backend_ = classifier_from_json(j.at("backend"));
  return model;
}

}  // namespace drift
