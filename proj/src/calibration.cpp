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

#include "drift/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "drift/forest.hpp"
#include "drift/knn.hpp"

namespace drift {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::pair<double, double> fit_logistic_1d(std::span<const double> scores,
                                          std::span<const int> targets) {
  // Newton-Raphson on the ridge-stabilized log-loss; the tiny ridge
  // keeps the 2x2 Hessian invertible on separable or constant scores.
  constexpr double kRidge = 1e-8;
  constexpr int kIterations = 60;
  double a = 0.0, b = 0.0;
  const std::size_t n = scores.size();
  for (int iter = 0; iter < kIterations; ++iter) {
    double ga = kRidge * a, gb = kRidge * b;
    double haa = kRidge, hab = 0.0, hbb = kRidge;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = scores[i];
      const double p = sigmoid(a * s + b);
      const double resid = p - static_cast<double>(targets[i]);
      ga += resid * s;
      gb += resid;
      const double w = p * (1.0 - p);
      haa += w * s * s;
      hab += w * s;
      hbb += w;
    }
    const double det = haa * hbb - hab * hab;
    if (std::abs(det) < 1e-300) break;
    const double da = (hbb * ga - hab * gb) / det;
    const double db = (haa * gb - hab * ga) / det;
    a -= da;
    b -= db;
    if (std::abs(da) < 1e-12 && std::abs(db) < 1e-12) break;
    if (!std::isfinite(a) || !std::isfinite(b)) return {0.0, 0.0};
  }
  return {a, b};
}

std::unique_ptr<PlattCalibratedClassifier> platt_calibrate(
    std::shared_ptr<const ProbClassifier> base, const Dataset& calib) {
  if (calib.n_rows() == 0) throw SizeError("empty calibration set");
  const ProbabilityMatrix scores = base->predict_proba(calib.features());
  const std::size_t n_classes = base->class_names().size();

  std::vector<PlattLayer> layers(n_classes);
  std::vector<double> class_scores(calib.n_rows());
  std::vector<int> class_targets(calib.n_rows());
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    std::size_t positives = 0;
    for (std::size_t r = 0; r < calib.n_rows(); ++r) {
      class_scores[r] = scores.at(r, cls);
      class_targets[r] =
          calib.labels()[r] == static_cast<int>(cls) ? 1 : 0;
      positives += static_cast<std::size_t>(class_targets[r]);
    }
    if (positives == 0) {
      // class absent from calibration data: pass through uncalibrated
      layers[cls].calibrated = false;
      continue;
    }
    const auto [a, b] = fit_logistic_1d(class_scores, class_targets);
    layers[cls].calibrated = true;
    layers[cls].slope = a;
    layers[cls].intercept = b;
  }
  return std::make_unique<PlattCalibratedClassifier>(std::move(base),
                                                     std::move(layers));
}

ProbabilityMatrix PlattCalibratedClassifier::predict_proba(
    const FeatureTable& table) const {
  ProbabilityMatrix raw = base_->predict_proba(table);
  ProbabilityMatrix out(raw.n_rows(), raw.n_classes());
  for (std::size_t r = 0; r < raw.n_rows(); ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < raw.n_classes(); ++c) {
      const PlattLayer& layer = layers_[c];
      const double p = raw.at(r, c);
      const double q =
          layer.calibrated ? sigmoid(layer.slope * p + layer.intercept) : p;
      out.set(r, c, q);
      total += q;
    }
    for (std::size_t c = 0; c < raw.n_classes(); ++c) {
      out.set(r, c, total > 0.0 ? out.at(r, c) / total : raw.at(r, c));
    }
  }
  return out;
}

nlohmann::ordered_json PlattCalibratedClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "platt_calibrated";
  j["version"] = 1;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const PlattLayer& layer : layers_) {
    layers.push_back({layer.calibrated, layer.slope, layer.intercept});
  }
  j["layers"] = std::move(layers);
  j["base"] = base_->to_json();
  return j;
}

std::unique_ptr<PlattCalibratedClassifier> PlattCalibratedClassifier::from_json(
    const nlohmann::ordered_json& j) {
  std::vector<PlattLayer> layers;
  for (const auto& item : j.at("layers")) {
    PlattLayer layer;
    layer.calibrated = item.at(0).get<bool>();
    layer.slope = item.at(1).get<double>();
    layer.intercept = item.at(2).get<double>();
    layers.push_back(layer);
  }
  std::shared_ptr<const ProbClassifier> base =
      classifier_from_json(j.at("base"));
  return std::make_unique<PlattCalibratedClassifier>(std::move(base),
                                                     std::move(layers));
}

void IsotonicCurve::fit(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw SizeError("isotonic fit on empty data");
  std::sort(points.begin(), points.end());
  // pool adjacent violators: merge blocks until means are non-decreasing
  std::vector<double> means, weights, ends;
  for (const auto& [score, outcome] : points) {
    means.push_back(outcome);
    weights.push_back(1.0);
    ends.push_back(score);
    while (means.size() > 1 && means[means.size() - 2] > means.back()) {
      const double w = weights[weights.size() - 2] + weights.back();
      const double m = (means[means.size() - 2] * weights[weights.size() - 2] +
                        means.back() * weights.back()) /
                       w;
      const double end = ends.back();
      means.pop_back();
      weights.pop_back();
      ends.pop_back();
      means.back() = m;
      weights.back() = w;
      ends.back() = end;
    }
  }
  block_ends_ = std::move(ends);
  block_values_ = std::move(means);
}

double IsotonicCurve::map(double score) const {
  if (block_ends_.empty()) return score;
  const auto it =
      std::lower_bound(block_ends_.begin(), block_ends_.end(), score);
  if (it == block_ends_.end()) return block_values_.back();
  return block_values_[static_cast<std::size_t>(it - block_ends_.begin())];
}

nlohmann::ordered_json IsotonicCurve::to_json() const {
  return {{"ends", block_ends_}, {"values", block_values_}};
}

IsotonicCurve IsotonicCurve::from_json(const nlohmann::ordered_json& j) {
  IsotonicCurve curve;
  curve.block_ends_ = j.at("ends").get<std::vector<double>>();
  curve.block_values_ = j.at("values").get<std::vector<double>>();
  return curve;
}

std::unique_ptr<ProbClassifier> classifier_from_json(
    const nlohmann::ordered_json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "random_forest_classifier") {
    return RandomForestClassifier::from_json(j);
  }
  if (type == "knn_classifier") return KnnClassifier::from_json(j);
  if (type == "platt_calibrated") {
    return PlattCalibratedClassifier::from_json(j);
  }
  throw ConfigError("unknown classifier type '" + type + "'");
}

}  // namespace drift
