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

#include <memory>
#include <optional>

#include "drift/calibration.hpp"
#include "drift/drift_features.hpp"
#include "drift/knn.hpp"
#include "drift/meta.hpp"
#include "drift/metrics.hpp"

namespace drift {

// Point accuracy estimate with its binomial sampling noise.
struct AccuracyPrediction {
  double value = 0.0;
  std::size_t n = 0;

  double sigma() const { return binomial_sigma(value, n); }
  Interval interval(const EvalConfig& cfg) const {
    return confidence_interval(value, n, cfg);
  }
};

// ---------------------------------------------------------------------------
// Average Thresholded Confidence

enum class AtcScoreKind { kNegEntropy, kMaxConfidence };

struct AtcModel {
  double threshold = 0.0;
  AtcScoreKind score_kind = AtcScoreKind::kNegEntropy;
};

// Per-row confidence scores: sum_j p_j log p_j (negative entropy) or
// the top-class probability.
std::vector<double> atc_scores(const ProbabilityMatrix& probs,
                               AtcScoreKind kind);

// Picks the threshold whose below-threshold fraction best matches the
// error rate on the labeled source scores. Candidates are midpoints of
// sorted distinct scores plus +-infinity; ties resolve to the smallest
// threshold.
AtcModel atc_fit(std::span<const double> scores,
                 const std::vector<bool>& correct,
                 AtcScoreKind kind = AtcScoreKind::kNegEntropy);

// Predicted accuracy: fraction of target rows scoring at or above the
// threshold.
AccuracyPrediction atc_predict(const AtcModel& model,
                               const ProbabilityMatrix& target_probs);

// ---------------------------------------------------------------------------
// Expert models (dataset-level regressors over drift features)

// Regresses measured accuracy on drift feature vectors; prediction is
// clamped to [0, 1]. Drop estimates derive from the stored source
// accuracy.
class ExpertModel {
 public:
  ExpertModel() = default;
  ExpertModel(ExtractorKind extractor, ForestParams regressor_params)
      : extractor_(extractor), regressor_(regressor_params) {}

  // Core fit on precomputed per-dataset feature vectors.
  void fit(const std::vector<std::vector<double>>& features,
           const std::vector<double>& accuracies);

  double predict_from_features(const std::vector<double>& features) const;
  AccuracyPrediction predict(const DriftFeatureContext& ctx,
                             const FeatureTable& target,
                             const ProbabilityMatrix& target_probs,
                             std::uint64_t seed) const;

  ExtractorKind extractor() const { return extractor_; }

  nlohmann::ordered_json to_json() const;
  static ExpertModel from_json(const nlohmann::ordered_json& j);

 private:
  ExtractorKind extractor_ = ExtractorKind::kRedyukPercentiles;
  RandomForestRegressor regressor_;
  bool fitted_ = false;
};

// Convenience fit straight from a training meta-set; extracts one
// feature vector per meta-dataset. Requires at least 2 entries.
ExpertModel expert_fit(const MetaSet& meta_train, ExtractorKind extractor,
                       const DriftFeatureContext& ctx,
                       ForestParams regressor_params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sample-wise error predictor

enum class ErrorBackend { kRandomForest, kKnn };

struct ErrorPredictorParams {
  ErrorBackend backend = ErrorBackend::kRandomForest;
  ForestParams forest{100, 0, 5, 0, 0};
  std::size_t knn_k = 10;
  // Cap on pooled training rows; 0 = unlimited. Rows beyond the cap are
  // subsampled deterministically.
  std::size_t max_rows = 20000;
  // Fraction of the pool held out to isotonic-calibrate the backend's
  // correctness probabilities (forest leaf frequencies flatten toward
  // the pool base rate otherwise). 0 disables calibration.
  double calibration_fraction = 0.2;
};

// Binary classifier over the primary model's per-sample correctness.
// Features are the raw columns plus the primary's top-class probability
// and margin; predicted accuracy is the mean predicted probability of
// correctness.
class ErrorPredictorModel {
 public:
  AccuracyPrediction predict(const ProbClassifier& primary,
                             const FeatureTable& target) const;
  AccuracyPrediction predict(const FeatureTable& target,
                             const ProbabilityMatrix& target_probs) const;

  bool constant() const { return constant_; }
  double constant_value() const { return constant_value_; }
  double anchor_offset() const { return anchor_offset_; }

  // Pins the model's prediction on a labeled clean set to the measured
  // accuracy there (the same role primary_valid plays for the ATC
  // threshold): subsequent predictions carry the constant offset.
  void anchor(const ProbClassifier& primary, const Dataset& source_valid);

  nlohmann::ordered_json to_json() const;
  static ErrorPredictorModel from_json(const nlohmann::ordered_json& j);

  friend ErrorPredictorModel error_predictor_fit(
      const ProbClassifier& primary,
      const std::vector<const Dataset*>& labeled_sets,
      const ErrorPredictorParams& params, std::uint64_t seed);

 private:
  std::unique_ptr<ProbClassifier> backend_;
  IsotonicCurve calibration_;
  double anchor_offset_ = 0.0;
  bool constant_ = false;
  double constant_value_ = 1.0;
};

// Pools the labeled shifted datasets, derives per-row correctness
// targets from the primary, and fits the backend. All-correct or
// all-wrong pools yield a constant model instead of an error.
ErrorPredictorModel error_predictor_fit(
    const ProbClassifier& primary,
    const std::vector<const Dataset*>& labeled_sets,
    const ErrorPredictorParams& params, std::uint64_t seed);

}  // namespace drift
