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

// k-nearest-neighbour classifier. Distance is squared standardized
// Euclidean over numeric columns plus 0/1 matching distance over
// categorical columns; a cell pair with exactly one missing side
// contributes 1. Probabilities are neighbour class frequencies.
class KnnClassifier : public ProbClassifier {
 public:
  explicit KnnClassifier(std::size_t k = 5) : k_(k) {}

  void fit(const Dataset& ds) override;
  ProbabilityMatrix predict_proba(const FeatureTable& table) const override;
  const std::vector<std::string>& class_names() const override {
    return classes_;
  }
  std::unique_ptr<ProbClassifier> fresh() const override {
    return std::make_unique<KnnClassifier>(k_);
  }

  std::size_t k() const { return k_; }

  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<KnnClassifier> from_json(
      const nlohmann::ordered_json& j);

 private:
  std::size_t k_;
  FeatureTable train_;
  std::vector<int> labels_;
  std::vector<std::string> classes_;
  std::vector<double> means_;
  std::vector<double> stddevs_;
};

}  // namespace drift
