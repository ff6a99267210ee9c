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

#include "drift/drift_features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drift/rng.hpp"

namespace drift {

const char* provenance_name(FeatureProvenance tag) {
  switch (tag) {
    case FeatureProvenance::kPercentile:
      return "percentile";
    case FeatureProvenance::kPad:
      return "pad";
    case FeatureProvenance::kRca:
      return "rca";
    case FeatureProvenance::kConfDrop:
      return "conf_drop";
  }
  return "?";
}

const char* extractor_name(ExtractorKind kind) {
  return kind == ExtractorKind::kRedyukPercentiles ? "redyuk_percentiles"
                                                   : "elsahar_metrics";
}

std::vector<double> feature_values(const DriftFeatureVector& features) {
  std::vector<double> values(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    values[i] = features[i].value;
  }
  return values;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw SizeError("percentile of empty data");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

DriftFeatureVector probability_percentiles(
    const ProbabilityMatrix& probs, const std::vector<double>& percentiles) {
  if (probs.n_rows() == 0) throw SizeError("empty probability matrix");
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    if (percentiles[i] < 0.0 || percentiles[i] > 100.0 ||
        (i > 0 && percentiles[i] < percentiles[i - 1])) {
      throw ConfigError("percentiles must be sorted within [0, 100]");
    }
  }
  DriftFeatureVector features;
  features.reserve(probs.n_classes() * percentiles.size());
  std::vector<double> column(probs.n_rows());
  for (std::size_t c = 0; c < probs.n_classes(); ++c) {
    for (std::size_t r = 0; r < probs.n_rows(); ++r) column[r] = probs.at(r, c);
    for (double pct : percentiles) {
      features.push_back({"p" + std::to_string(static_cast<int>(pct)) +
                              "_class" + std::to_string(c),
                          FeatureProvenance::kPercentile,
                          percentile(column, pct)});
    }
  }
  return features;
}

namespace {

// source rows labeled 0, target rows labeled 1
Dataset make_domain_dataset(const FeatureTable& source,
                            const FeatureTable& target) {
  if (!source.same_schema(target)) {
    throw SchemaError("PAD inputs must share the same columns");
  }
  const std::size_t n = source.n_rows() + target.n_rows();
  FeatureTable merged(source.columns(), n);
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < source.n_rows(); ++r) {
    for (std::size_t c = 0; c < source.n_cols(); ++c) {
      merged.set(r, c, source.at(r, c));
    }
    labels[r] = 0;
  }
  for (std::size_t r = 0; r < target.n_rows(); ++r) {
    for (std::size_t c = 0; c < target.n_cols(); ++c) {
      merged.set(source.n_rows() + r, c, target.at(r, c));
    }
    labels[source.n_rows() + r] = 1;
  }
  return Dataset(std::move(merged), std::move(labels), {"source", "target"});
}

}  // namespace

double proxy_a_distance(const FeatureTable& source, const FeatureTable& target,
                        const ForestParams& domain_params, std::uint64_t seed) {
  if (source.n_rows() == 0 || target.n_rows() == 0) {
    throw SizeError("PAD inputs must be non-empty");
  }
  const Dataset domain = make_domain_dataset(source, target);

  Rng rng(derive_seed(seed, "pad-cv"));
  std::vector<std::size_t> perm(domain.n_rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);
  const std::size_t half = perm.size() / 2;
  const std::vector<std::size_t> fold_a(perm.begin(), perm.begin() + half);
  const std::vector<std::size_t> fold_b(perm.begin() + half, perm.end());

  double errors = 0.0;
  std::size_t total = 0;
  for (int swap = 0; swap < 2; ++swap) {
    const auto& train_idx = swap == 0 ? fold_a : fold_b;
    const auto& test_idx = swap == 0 ? fold_b : fold_a;
    const Dataset train = domain.take_rows(train_idx);
    const Dataset test = domain.take_rows(test_idx);
    ForestParams params = domain_params;
    params.seed = derive_seed(seed, swap == 0 ? "pad-fold0" : "pad-fold1");
    double fold_error;
    try {
      RandomForestClassifier domain_clf(params);
      domain_clf.fit(train);
      fold_error = 1.0 - domain_clf.accuracy(test);
    } catch (const DegenerateError&) {
      // a fold holding one domain only cannot be discriminated
      fold_error = 0.5;
    }
    errors += fold_error * static_cast<double>(test.n_rows());
    total += test.n_rows();
  }
  const double eps = errors / static_cast<double>(total);
  return std::clamp(2.0 * (1.0 - 2.0 * eps), 0.0, 2.0);
}

double reverse_classification_accuracy(const ProbClassifier& primary,
                                       const Dataset& source_valid,
                                       const FeatureTable& target,
                                       std::uint64_t seed) {
  if (target.n_rows() == 0) throw SizeError("RCA target must be non-empty");
  const std::vector<int> pseudo = primary.predict(target);
  const std::set<int> distinct(pseudo.begin(), pseudo.end());
  if (distinct.size() < 2) {
    // constant predictor: accuracy of always answering that class
    const int only = *distinct.begin();
    std::size_t hits = 0;
    for (int y : source_valid.labels()) hits += (y == only);
    return static_cast<double>(hits) /
           static_cast<double>(source_valid.n_rows());
  }
  const Dataset pseudo_target(target, pseudo, primary.class_names());
  auto retrained = primary.fresh();
  if (auto* forest = dynamic_cast<RandomForestClassifier*>(retrained.get())) {
    forest->reseed(derive_seed(seed, "rca"));
  }
  retrained->fit(pseudo_target);
  return retrained->accuracy(source_valid);
}

double confidence_drop(const ProbClassifier& primary,
                       const FeatureTable& source_valid,
                       const FeatureTable& target) {
  if (source_valid.n_rows() == 0 || target.n_rows() == 0) {
    throw SizeError("confidence_drop inputs must be non-empty");
  }
  const auto mean_conf = [&](const FeatureTable& table) {
    const ProbabilityMatrix probs = primary.predict_proba(table);
    double sum = 0.0;
    for (std::size_t r = 0; r < probs.n_rows(); ++r) sum += probs.max_prob(r);
    return sum / static_cast<double>(probs.n_rows());
  };
  return mean_conf(source_valid) - mean_conf(target);
}

const std::vector<double>& decile_grid() {
  static const std::vector<double> grid = {0,  10, 20, 30, 40, 50,
                                           60, 70, 80, 90, 100};
  return grid;
}

DriftFeatureVector extract_drift_features(ExtractorKind kind,
                                          const DriftFeatureContext& ctx,
                                          const FeatureTable& target,
                                          const ProbabilityMatrix& target_probs,
                                          std::uint64_t seed) {
  if (kind == ExtractorKind::kRedyukPercentiles) {
    return probability_percentiles(target_probs, decile_grid());
  }
  DriftFeatureVector features;
  features.push_back(
      {"pad", FeatureProvenance::kPad,
       proxy_a_distance(ctx.source_valid->features(), target,
                        ctx.domain_forest, derive_seed(seed, "pad"))});
  features.push_back(
      {"rca", FeatureProvenance::kRca,
       reverse_classification_accuracy(*ctx.primary, *ctx.source_valid, target,
                                       derive_seed(seed, "rca"))});
  features.push_back(
      {"conf_drop", FeatureProvenance::kConfDrop,
       confidence_drop(*ctx.primary, ctx.source_valid->features(), target)});
  return features;
}

}  // namespace drift
