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

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "drift/dataset.hpp"

#include "json.hpp"

namespace drift {

// Per-row class probabilities; column order follows the classifier's
// class set. Rows sum to 1 within 1e-9.
class ProbabilityMatrix {
 public:
  ProbabilityMatrix() = default;
  ProbabilityMatrix(std::size_t n_rows, std::size_t n_classes)
      : n_rows_(n_rows), n_classes_(n_classes), probs_(n_rows * n_classes) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_classes() const { return n_classes_; }

  double at(std::size_t row, std::size_t cls) const {
    return probs_[row * n_classes_ + cls];
  }
  void set(std::size_t row, std::size_t cls, double p) {
    probs_[row * n_classes_ + cls] = p;
  }

  int argmax(std::size_t row) const {
    int best = 0;
    for (std::size_t c = 1; c < n_classes_; ++c) {
      if (at(row, c) > at(row, best)) best = static_cast<int>(c);
    }
    return best;
  }

  double max_prob(std::size_t row) const {
    return at(row, static_cast<std::size_t>(argmax(row)));
  }

  // Difference between the two highest probabilities.
  double margin(std::size_t row) const {
    double top1 = 0.0, top2 = 0.0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double p = at(row, c);
      if (p > top1) {
        top2 = top1;
        top1 = p;
      } else if (p > top2) {
        top2 = p;
      }
    }
    return top1 - top2;
  }

  // sum_j p_j log p_j with 0*log 0 = 0; in [-log C, 0].
  double neg_entropy(std::size_t row) const {
    double s = 0.0;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double p = at(row, c);
      if (p > 0.0) s += p * std::log(p);
    }
    return s;
  }

  double row_sum(std::size_t row) const {
    double s = 0.0;
    for (std::size_t c = 0; c < n_classes_; ++c) s += at(row, c);
    return s;
  }

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_classes_ = 0;
  std::vector<double> probs_;
};

// Probabilistic classifier interface. predict is the row-wise argmax
// of predict_proba; ties resolve to the smallest class index.
class ProbClassifier {
 public:
  virtual ~ProbClassifier() = default;

  virtual ProbabilityMatrix predict_proba(const FeatureTable& table) const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;

  // Unfitted copy with the same hyper-parameters (same model family).
  virtual std::unique_ptr<ProbClassifier> fresh() const = 0;
  virtual void fit(const Dataset& ds) = 0;

  virtual nlohmann::ordered_json to_json() const = 0;

  std::vector<int> predict(const FeatureTable& table) const {
    const ProbabilityMatrix probs = predict_proba(table);
    std::vector<int> labels(probs.n_rows());
    for (std::size_t r = 0; r < probs.n_rows(); ++r) labels[r] = probs.argmax(r);
    return labels;
  }

  double accuracy(const Dataset& ds) const {
    const auto pred = predict(ds.features());
    std::size_t hits = 0;
    for (std::size_t r = 0; r < pred.size(); ++r) {
      if (pred[r] == ds.labels()[r]) ++hits;
    }
    return ds.n_rows() ? static_cast<double>(hits) / ds.n_rows() : 0.0;
  }
};

// Real-valued regressor over plain feature vectors.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual void fit(const std::vector<std::vector<double>>& x,
                   const std::vector<double>& y) = 0;
  virtual std::vector<double> predict(
      const std::vector<std::vector<double>>& x) const = 0;
  virtual nlohmann::ordered_json to_json() const = 0;
};

std::unique_ptr<ProbClassifier> classifier_from_json(
    const nlohmann::ordered_json& j);

}  // namespace drift
