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

#include "drift/model.hpp"

namespace drift {

// One-vs-rest sigmoid sigma(a*score + b) for a single class. A class
// absent from the calibration data passes through uncalibrated.
struct PlattLayer {
  bool calibrated = false;
  double slope = 0.0;
  double intercept = 0.0;
};

// Wraps a base classifier; per-class probabilities are mapped through
// fitted sigmoids and renormalized to sum 1.
class PlattCalibratedClassifier : public ProbClassifier {
 public:
  PlattCalibratedClassifier() = default;
  PlattCalibratedClassifier(std::shared_ptr<const ProbClassifier> base,
                            std::vector<PlattLayer> layers)
      : base_(std::move(base)), layers_(std::move(layers)) {}

  void fit(const Dataset&) override {
    throw DriftError("use platt_calibrate to build a calibrated model");
  }
  ProbabilityMatrix predict_proba(const FeatureTable& table) const override;
  const std::vector<std::string>& class_names() const override {
    return base_->class_names();
  }
  std::unique_ptr<ProbClassifier> fresh() const override {
    return base_->fresh();
  }

  const std::vector<PlattLayer>& layers() const { return layers_; }
  const ProbClassifier& base() const { return *base_; }

  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<PlattCalibratedClassifier> from_json(
      const nlohmann::ordered_json& j);

 private:
  std::shared_ptr<const ProbClassifier> base_;
  std::vector<PlattLayer> layers_;
};

// Fits one logistic sigmoid per class on the base model's calibration
// scores. The calibration set must be disjoint from the base model's
// training data (the harness enforces this).
std::unique_ptr<PlattCalibratedClassifier> platt_calibrate(
    std::shared_ptr<const ProbClassifier> base, const Dataset& calib);

// Newton-fitted 2-parameter logistic regression on one scalar feature;
// exposed for tests.
std::pair<double, double> fit_logistic_1d(std::span<const double> scores,
                                          std::span<const int> targets);

// Monotone step-function calibration fit by pool-adjacent-violators:
// maps a raw score to the empirical outcome rate of its block. An
// unfitted curve is the identity.
class IsotonicCurve {
 public:
  void fit(std::vector<std::pair<double, double>> points);
  double map(double score) const;
  bool fitted() const { return !block_ends_.empty(); }

  nlohmann::ordered_json to_json() const;
  static IsotonicCurve from_json(const nlohmann::ordered_json& j);

 private:
  std::vector<double> block_ends_;    // last score of each block
  std::vector<double> block_values_;  // non-decreasing block means
};

}  // namespace drift
