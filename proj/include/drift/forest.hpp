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

#include <cstdint>
#include <vector>

#include "drift/model.hpp"

namespace drift {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;           // 0 = unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(d)) for trees, d for regression
  std::uint64_t seed = 0;
};

// One CART node. Interior nodes have feature >= 0: numeric splits send
// x < threshold left, categorical splits send x == category left,
// missing cells follow missing_left. Leaves carry a class distribution
// (classification) or a mean (regression).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int category = -1;
  bool missing_left = true;
  int left = -1;
  int right = -1;
  std::vector<double> dist;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  const TreeNode& leaf_for(const FeatureTable& table, std::size_t row) const;
};

namespace detail {
// Bootstrap + greedy gini CART on the given dataset; deterministic
// under tree_seed. Shared by the parallel and reference forest kernels.
Tree fit_classification_tree(const Dataset& ds, const ForestParams& params,
                             std::uint64_t tree_seed);
}  // namespace detail

// Forest kernels. The production versions parallelize with OpenMP over
// independent slots (per-tree derived seeds, per-row outputs); the
// reference versions are the plain serial loops kept as ground truth
// for tests and the kernel benchmark. Outputs are identical.
std::vector<Tree> fit_forest_trees(const Dataset& ds,
                                   const ForestParams& params);
ProbabilityMatrix forest_predict_proba(const std::vector<Tree>& trees,
                                       const FeatureTable& table,
                                       std::size_t n_classes);

namespace reference {
std::vector<Tree> fit_forest_trees(const Dataset& ds,
                                   const ForestParams& params);
ProbabilityMatrix forest_predict_proba(const std::vector<Tree>& trees,
                                       const FeatureTable& table,
                                       std::size_t n_classes);
}  // namespace reference

// Bagged CART classifier; predict_proba averages per-tree leaf class
// frequencies. Requires at least two classes in the training data.
class RandomForestClassifier : public ProbClassifier {
 public:
  explicit RandomForestClassifier(ForestParams params = {})
      : params_(params) {}

  void fit(const Dataset& ds) override;
  ProbabilityMatrix predict_proba(const FeatureTable& table) const override;
  const std::vector<std::string>& class_names() const override {
    return classes_;
  }
  std::unique_ptr<ProbClassifier> fresh() const override;
  void reseed(std::uint64_t seed) { params_.seed = seed; }

  const ForestParams& params() const { return params_; }
  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<Column>& training_columns() const { return schema_; }
  bool fitted() const { return !trees_.empty(); }

  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<RandomForestClassifier> from_json(
      const nlohmann::ordered_json& j);

 private:
  ForestParams params_;
  std::vector<Tree> trees_;
  std::vector<std::string> classes_;
  std::vector<Column> schema_;
};

// Bagged variance-reduction CART regressor over plain numeric feature
// vectors; prediction is the mean of per-tree leaf means.
class RandomForestRegressor : public Regressor {
 public:
  explicit RandomForestRegressor(ForestParams params = {})
      : params_(params) {}

  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<double>& y) override;
  std::vector<double> predict(
      const std::vector<std::vector<double>>& x) const override;

  const ForestParams& params() const { return params_; }

  nlohmann::ordered_json to_json() const override;
  static std::unique_ptr<RandomForestRegressor> from_json(
      const nlohmann::ordered_json& j);

 private:
  ForestParams params_;
  std::vector<Tree> trees_;
};

}  // namespace drift
