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

#include <string>
#include <vector>

#include "drift/forest.hpp"
#include "drift/model.hpp"

namespace drift {

enum class FeatureProvenance { kPercentile, kPad, kRca, kConfDrop };

const char* provenance_name(FeatureProvenance tag);

struct DriftFeature {
  std::string name;
  FeatureProvenance tag;
  double value = 0.0;
};

// Fixed-length, fixed-order feature vector over one target dataset.
using DriftFeatureVector = std::vector<DriftFeature>;

std::vector<double> feature_values(const DriftFeatureVector& features);

// Empirical percentile with linear interpolation between order
// statistics; values need not be sorted.
double percentile(std::vector<double> values, double pct);

// Per class column, the requested percentiles of the predicted
// probabilities. Percentiles must be sorted within [0, 100].
DriftFeatureVector probability_percentiles(
    const ProbabilityMatrix& probs, const std::vector<double>& percentiles);

// Domain-discriminator divergence: label source rows 0 and target rows
// 1, fit a forest with 2-fold cross-validation, and map the held-out
// error eps to 2 * (1 - 2 * eps), clamped to [0, 2].
double proxy_a_distance(const FeatureTable& source, const FeatureTable& target,
                        const ForestParams& domain_params, std::uint64_t seed);

// Accuracy on labeled source data of a same-family model retrained on
// the target pseudo-labeled by the primary. If pseudo-labels collapse
// to one class, returns the constant predictor's accuracy.
double reverse_classification_accuracy(const ProbClassifier& primary,
                                       const Dataset& source_valid,
                                       const FeatureTable& target,
                                       std::uint64_t seed);

// Mean top-class probability on source_valid minus the same on target.
double confidence_drop(const ProbClassifier& primary,
                       const FeatureTable& source_valid,
                       const FeatureTable& target);

// The decile grid used by the percentile expert model.
const std::vector<double>& decile_grid();

// Shared inputs for assembling expert feature vectors. The domain
// classifier is regularized (min_leaf) so its cross-validated error
// tracks the Bayes error instead of overfitting the overlap region.
struct DriftFeatureContext {
  const ProbClassifier* primary = nullptr;
  const Dataset* source_valid = nullptr;
  ForestParams domain_forest{50, 8, 20, 0, 0};
};

enum class ExtractorKind { kRedyukPercentiles, kElsaharMetrics };

const char* extractor_name(ExtractorKind kind);

// Redyuk-style: decile percentiles of the primary's class probabilities
// on the target. Elsahar-style: [PAD, RCA, confidence drop] against the
// source_valid reference.
DriftFeatureVector extract_drift_features(ExtractorKind kind,
                                          const DriftFeatureContext& ctx,
                                          const FeatureTable& target,
                                          const ProbabilityMatrix& target_probs,
                                          std::uint64_t seed);

}  // namespace drift
