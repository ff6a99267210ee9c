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

#include "drift/forest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drift/parallel.hpp"
#include "drift/rng.hpp"

namespace drift {

const TreeNode& Tree::leaf_for(const FeatureTable& table,
                               std::size_t row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& node = nodes[at];
    const std::size_t col = static_cast<std::size_t>(node.feature);
    const double v = table.at(row, col);
    bool go_left;
    if (is_missing(v, table.column(col).kind)) {
      go_left = node.missing_left;
    } else if (node.category >= 0) {
      go_left = v == static_cast<double>(node.category);
    } else {
      go_left = v < node.threshold;
    }
    at = go_left ? node.left : node.right;
  }
  return nodes[at];
}

namespace {

struct Candidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  int category = -1;
  double score = 0.0;  // weighted child gini over non-missing rows
};

double gini_from_counts(const std::vector<std::size_t>& counts,
                        std::size_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

// Greedy recursive builder for one bootstrap sample. Row indices may
// repeat (bootstrap multiset). Deterministic: the feature subset is
// sorted before scanning, ties keep the first best candidate.
class ClassificationTreeBuilder {
 public:
  ClassificationTreeBuilder(const Dataset& ds, const ForestParams& params,
                            Rng& rng)
      : ds_(ds), params_(params), rng_(rng) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    build_node(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int mtry() const {
    if (params_.features_per_split > 0) {
      return std::min<int>(params_.features_per_split,
                           static_cast<int>(ds_.n_cols()));
    }
    return static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(ds_.n_cols()))));
  }

  int make_leaf(Tree& tree, const std::vector<std::size_t>& rows) {
    TreeNode leaf;
    std::vector<std::size_t> counts(ds_.n_classes(), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(ds_.labels()[r])];
    leaf.dist.resize(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
      leaf.dist[c] =
          static_cast<double>(counts[c]) / static_cast<double>(rows.size());
    }
    tree.nodes.push_back(std::move(leaf));
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  Candidate scan_numeric(const std::vector<std::size_t>& rows,
                         std::size_t col) const {
    Candidate best;
    std::vector<std::pair<double, int>> cells;
    cells.reserve(rows.size());
    for (std::size_t r : rows) {
      const double v = ds_.at(r, col);
      if (!std::isnan(v)) cells.emplace_back(v, ds_.labels()[r]);
    }
    if (cells.size() < 2) return best;
    std::sort(cells.begin(), cells.end());
    std::vector<std::size_t> left_counts(ds_.n_classes(), 0);
    std::vector<std::size_t> total_counts(ds_.n_classes(), 0);
    for (const auto& [v, y] : cells) ++total_counts[static_cast<std::size_t>(y)];
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    for (std::size_t i = 0; i + 1 < cells.size();) {
      // advance over one run of equal values
      const double v = cells[i].first;
      while (i < cells.size() && cells[i].first == v) {
        ++left_counts[static_cast<std::size_t>(cells[i].second)];
        ++i;
      }
      if (i >= cells.size()) break;
      const std::size_t nl = i;
      const std::size_t nr = cells.size() - i;
      if (nl < min_leaf || nr < min_leaf) continue;
      std::vector<std::size_t> right_counts(ds_.n_classes());
      for (std::size_t c = 0; c < right_counts.size(); ++c) {
        right_counts[c] = total_counts[c] - left_counts[c];
      }
      const double score =
          (static_cast<double>(nl) * gini_from_counts(left_counts, nl) +
           static_cast<double>(nr) * gini_from_counts(right_counts, nr)) /
          static_cast<double>(cells.size());
      if (!best.valid || score < best.score) {
        // the midpoint of adjacent doubles can round down onto v, which
        // would leave the left partition empty; fall back to the upper
        // value (x < threshold still separates the run below it)
        double threshold = (v + cells[i].first) / 2.0;
        if (!(threshold > v)) threshold = cells[i].first;
        best.valid = true;
        best.feature = static_cast<int>(col);
        best.threshold = threshold;
        best.category = -1;
        best.score = score;
      }
    }
    return best;
  }

  Candidate scan_categorical(const std::vector<std::size_t>& rows,
                             std::size_t col) const {
    Candidate best;
    // per-code class counts over non-missing cells
    const std::size_t vocab = ds_.columns()[col].vocab.size();
    std::vector<std::vector<std::size_t>> code_counts(
        vocab, std::vector<std::size_t>(ds_.n_classes(), 0));
    std::vector<std::size_t> total_counts(ds_.n_classes(), 0);
    std::size_t n_present = 0;
    for (std::size_t r : rows) {
      const double v = ds_.at(r, col);
      if (is_missing(v, ColumnKind::kCategorical)) continue;
      ++code_counts[static_cast<std::size_t>(v)]
                   [static_cast<std::size_t>(ds_.labels()[r])];
      ++total_counts[static_cast<std::size_t>(ds_.labels()[r])];
      ++n_present;
    }
    if (n_present < 2) return best;
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    for (std::size_t code = 0; code < vocab; ++code) {
      std::size_t nl = 0;
      for (std::size_t c : code_counts[code]) nl += c;
      const std::size_t nr = n_present - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      std::vector<std::size_t> right_counts(ds_.n_classes());
      for (std::size_t c = 0; c < right_counts.size(); ++c) {
        right_counts[c] = total_counts[c] - code_counts[code][c];
      }
      const double score =
          (static_cast<double>(nl) * gini_from_counts(code_counts[code], nl) +
           static_cast<double>(nr) * gini_from_counts(right_counts, nr)) /
          static_cast<double>(n_present);
      if (!best.valid || score < best.score) {
        best.valid = true;
        best.feature = static_cast<int>(col);
        best.category = static_cast<int>(code);
        best.score = score;
      }
    }
    return best;
  }

  int build_node(Tree& tree, std::vector<std::size_t> rows, int depth) {
    bool pure = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (ds_.labels()[rows[i]] != ds_.labels()[rows[0]]) {
        pure = false;
        break;
      }
    }
    if (pure || rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) ||
        rows.size() < 2 ||
        (params_.max_depth > 0 && depth >= params_.max_depth)) {
      return make_leaf(tree, rows);
    }

    auto subset = rng_.sample_without_replacement(
        ds_.n_cols(), static_cast<std::size_t>(mtry()));
    std::sort(subset.begin(), subset.end());
    Candidate best;
    for (std::size_t col : subset) {
      const Candidate cand =
          ds_.columns()[col].kind == ColumnKind::kNumeric
              ? scan_numeric(rows, col)
              : scan_categorical(rows, col);
      if (cand.valid && (!best.valid || cand.score < best.score)) best = cand;
    }
    if (!best.valid) return make_leaf(tree, rows);

    const std::size_t col = static_cast<std::size_t>(best.feature);
    const ColumnKind kind = ds_.columns()[col].kind;
    std::vector<std::size_t> left, right, missing;
    for (std::size_t r : rows) {
      const double v = ds_.at(r, col);
      if (is_missing(v, kind)) {
        missing.push_back(r);
      } else if (best.category >= 0
                     ? v == static_cast<double>(best.category)
                     : v < best.threshold) {
        left.push_back(r);
      } else {
        right.push_back(r);
      }
    }
    if (left.empty() || right.empty()) return make_leaf(tree, rows);
    // missing cells follow the larger child (by non-missing count)
    const bool missing_left = left.size() >= right.size();
    auto& absorb = missing_left ? left : right;
    absorb.insert(absorb.end(), missing.begin(), missing.end());
    rows.clear();
    rows.shrink_to_fit();

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].threshold = best.threshold;
    tree.nodes[node_id].category = best.category;
    tree.nodes[node_id].missing_left = missing_left;
    const int left_id = build_node(tree, std::move(left), depth + 1);
    const int right_id = build_node(tree, std::move(right), depth + 1);
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }

  const Dataset& ds_;
  const ForestParams& params_;
  Rng& rng_;
};

}  // namespace

namespace detail {

Tree fit_classification_tree(const Dataset& ds, const ForestParams& params,
                             std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  std::vector<std::size_t> bootstrap(ds.n_rows());
  for (std::size_t i = 0; i < bootstrap.size(); ++i) {
    bootstrap[i] = rng.index(ds.n_rows());
  }
  ClassificationTreeBuilder builder(ds, params, rng);
  return builder.build(std::move(bootstrap));
}

}  // namespace detail

std::vector<Tree> fit_forest_trees(const Dataset& ds,
                                   const ForestParams& params) {
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(trees.size(), [&](std::size_t t) {
    trees[t] = detail::fit_classification_tree(ds, params,
                                               derive_seed(params.seed, t));
  });
  return trees;
}

ProbabilityMatrix forest_predict_proba(const std::vector<Tree>& trees,
                                       const FeatureTable& table,
                                       std::size_t n_classes) {
  ProbabilityMatrix probs(table.n_rows(), n_classes);
  parallel_for(table.n_rows(), [&](std::size_t r) {
    for (const Tree& tree : trees) {
      const TreeNode& leaf = tree.leaf_for(table, r);
      for (std::size_t c = 0; c < n_classes; ++c) {
        probs.set(r, c, probs.at(r, c) + leaf.dist[c]);
      }
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      probs.set(r, c, probs.at(r, c) / static_cast<double>(trees.size()));
    }
  });
  return probs;
}

namespace reference {

std::vector<Tree> fit_forest_trees(const Dataset& ds,
                                   const ForestParams& params) {
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_trees));
  serial_for(trees.size(), [&](std::size_t t) {
    trees[t] = detail::fit_classification_tree(ds, params,
                                               derive_seed(params.seed, t));
  });
  return trees;
}

ProbabilityMatrix forest_predict_proba(const std::vector<Tree>& trees,
                                       const FeatureTable& table,
                                       std::size_t n_classes) {
  ProbabilityMatrix probs(table.n_rows(), n_classes);
  serial_for(table.n_rows(), [&](std::size_t r) {
    for (const Tree& tree : trees) {
      const TreeNode& leaf = tree.leaf_for(table, r);
      for (std::size_t c = 0; c < n_classes; ++c) {
        probs.set(r, c, probs.at(r, c) + leaf.dist[c]);
      }
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      probs.set(r, c, probs.at(r, c) / static_cast<double>(trees.size()));
    }
  });
  return probs;
}

}  // namespace reference

void RandomForestClassifier::fit(const Dataset& ds) {
  if (ds.n_rows() < 2) {
    throw DegenerateError("forest training needs at least 2 rows, got " +
                          std::to_string(ds.n_rows()));
  }
  std::set<int> present(ds.labels().begin(), ds.labels().end());
  if (present.size() < 2) {
    throw DegenerateError("forest training data holds a single class");
  }
  classes_ = ds.class_set();
  schema_ = ds.columns();
  trees_ = fit_forest_trees(ds, params_);
}

ProbabilityMatrix RandomForestClassifier::predict_proba(
    const FeatureTable& table) const {
  if (trees_.empty()) throw DriftError("predict_proba on unfitted forest");
  if (table.n_cols() != schema_.size()) {
    throw SchemaError("feature table has " + std::to_string(table.n_cols()) +
                      " columns, model expects " +
                      std::to_string(schema_.size()));
  }
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (table.column(c).name != schema_[c].name ||
        table.column(c).kind != schema_[c].kind) {
      throw SchemaError("feature table column '" + table.column(c).name +
                        "' does not match model column '" + schema_[c].name +
                        "'");
    }
  }
  return forest_predict_proba(trees_, table, classes_.size());
}

std::unique_ptr<ProbClassifier> RandomForestClassifier::fresh() const {
  return std::make_unique<RandomForestClassifier>(params_);
}

namespace {

nlohmann::ordered_json tree_to_json(const Tree& tree) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({n.feature, n.threshold, n.category, n.missing_left,
                     n.left, n.right, n.dist, n.value});
  }
  return nodes;
}

Tree tree_from_json(const nlohmann::ordered_json& j) {
  Tree tree;
  for (const auto& row : j) {
    TreeNode n;
    n.feature = row.at(0).get<int>();
    n.threshold = row.at(1).get<double>();
    n.category = row.at(2).get<int>();
    n.missing_left = row.at(3).get<bool>();
    n.left = row.at(4).get<int>();
    n.right = row.at(5).get<int>();
    n.dist = row.at(6).get<std::vector<double>>();
    n.value = row.at(7).get<double>();
    tree.nodes.push_back(std::move(n));
  }
  return tree;
}

nlohmann::ordered_json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf},
          {"features_per_split", p.features_per_split},
          {"seed", p.seed}};
}

ForestParams params_from_json(const nlohmann::ordered_json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_leaf = j.at("min_leaf").get<int>();
  p.features_per_split = j.at("features_per_split").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

nlohmann::ordered_json columns_to_json(const std::vector<Column>& cols) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Column& c : cols) {
    out.push_back({{"name", c.name},
                   {"kind", c.kind == ColumnKind::kNumeric ? "numeric"
                                                           : "categorical"},
                   {"vocab", c.vocab}});
  }
  return out;
}

std::vector<Column> columns_from_json(const nlohmann::ordered_json& j) {
  std::vector<Column> cols;
  for (const auto& item : j) {
    Column c;
    c.name = item.at("name").get<std::string>();
    c.kind = item.at("kind").get<std::string>() == "numeric"
                 ? ColumnKind::kNumeric
                 : ColumnKind::kCategorical;
    c.vocab = item.at("vocab").get<std::vector<std::string>>();
    cols.push_back(std::move(c));
  }
  return cols;
}

}  // namespace

nlohmann::ordered_json RandomForestClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "random_forest_classifier";
  j["version"] = 1;
  j["params"] = params_to_json(params_);
  j["classes"] = classes_;
  j["columns"] = columns_to_json(schema_);
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : trees_) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

std::unique_ptr<RandomForestClassifier> RandomForestClassifier::from_json(
    const nlohmann::ordered_json& j) {
  auto model =
      std::make_unique<RandomForestClassifier>(params_from_json(j.at("params")));
  model->classes_ = j.at("classes").get<std::vector<std::string>>();
  model->schema_ = columns_from_json(j.at("columns"));
  for (const auto& t : j.at("trees")) {
    model->trees_.push_back(tree_from_json(t));
  }
  return model;
}

namespace {

// Regression CART over a plain numeric matrix; splits minimize the
// summed child SSE.
class RegressionTreeBuilder {
 public:
  RegressionTreeBuilder(const std::vector<std::vector<double>>& x,
                        const std::vector<double>& y,
                        const ForestParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    build_node(tree, std::move(rows), 0);
    return tree;
  }

 private:
  std::size_t n_features() const { return x_.empty() ? 0 : x_[0].size(); }

  int mtry() const {
    if (params_.features_per_split > 0) {
      return std::min<int>(params_.features_per_split,
                           static_cast<int>(n_features()));
    }
    return static_cast<int>(n_features());
  }

  int make_leaf(Tree& tree, const std::vector<std::size_t>& rows) {
    TreeNode leaf;
    double sum = 0.0;
    for (std::size_t r : rows) sum += y_[r];
    leaf.value = sum / static_cast<double>(rows.size());
    tree.nodes.push_back(std::move(leaf));
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build_node(Tree& tree, std::vector<std::size_t> rows, int depth) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r : rows) {
      sum += y_[r];
      sum_sq += y_[r] * y_[r];
    }
    const double sse =
        sum_sq - sum * sum / static_cast<double>(rows.size());
    if (rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) ||
        rows.size() < 2 || sse <= 1e-12 ||
        (params_.max_depth > 0 && depth >= params_.max_depth)) {
      return make_leaf(tree, rows);
    }

    auto subset = rng_.sample_without_replacement(
        n_features(), static_cast<std::size_t>(mtry()));
    std::sort(subset.begin(), subset.end());
    bool found = false;
    std::size_t best_col = 0;
    double best_threshold = 0.0, best_score = 0.0;
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    std::vector<std::pair<double, double>> cells;
    for (std::size_t col : subset) {
      cells.clear();
      for (std::size_t r : rows) cells.emplace_back(x_[r][col], y_[r]);
      std::sort(cells.begin(), cells.end());
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < cells.size();) {
        const double v = cells[i].first;
        while (i < cells.size() && cells[i].first == v) {
          left_sum += cells[i].second;
          left_sq += cells[i].second * cells[i].second;
          ++i;
        }
        if (i >= cells.size()) break;
        const std::size_t nl = i;
        const std::size_t nr = cells.size() - i;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double right_sq = sum_sq - left_sq;
        const double score =
            (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
            (right_sq - right_sum * right_sum / static_cast<double>(nr));
        if (!found || score < best_score) {
          double threshold = (v + cells[i].first) / 2.0;
          if (!(threshold > v)) threshold = cells[i].first;
          found = true;
          best_col = col;
          best_threshold = threshold;
          best_score = score;
        }
      }
    }
    if (!found) return make_leaf(tree, rows);

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_[r][best_col] < best_threshold ? left : right).push_back(r);
    }
    if (left.empty() || right.empty()) return make_leaf(tree, rows);
    rows.clear();
    rows.shrink_to_fit();
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].feature = static_cast<int>(best_col);
    tree.nodes[node_id].threshold = best_threshold;
    const int left_id = build_node(tree, std::move(left), depth + 1);
    const int right_id = build_node(tree, std::move(right), depth + 1);
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  const ForestParams& params_;
  Rng& rng_;
};

double regression_tree_predict(const Tree& tree,
                               const std::vector<double>& row) {
  int at = 0;
  while (tree.nodes[at].feature >= 0) {
    const TreeNode& node = tree.nodes[at];
    at = row[static_cast<std::size_t>(node.feature)] < node.threshold
             ? node.left
             : node.right;
  }
  return tree.nodes[at].value;
}

}  // namespace

void RandomForestRegressor::fit(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y) {
  if (x.empty() || y.empty()) {
    throw SizeError("regressor training input is empty");
  }
  if (x.size() != y.size()) {
    throw SizeError("regressor features/targets length mismatch: " +
                    std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  trees_.assign(static_cast<std::size_t>(params_.n_trees), Tree{});
  parallel_for(trees_.size(), [&](std::size_t t) {
    Rng rng(derive_seed(params_.seed, t));
    std::vector<std::size_t> bootstrap(x.size());
    for (std::size_t i = 0; i < bootstrap.size(); ++i) {
      bootstrap[i] = rng.index(x.size());
    }
    RegressionTreeBuilder builder(x, y, params_, rng);
    trees_[t] = builder.build(std::move(bootstrap));
  });
}

std::vector<double> RandomForestRegressor::predict(
    const std::vector<std::vector<double>>& x) const {
  if (trees_.empty()) throw DriftError("predict on unfitted regressor");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sum = 0.0;
    for (const Tree& tree : trees_) sum += regression_tree_predict(tree, x[i]);
    out[i] = sum / static_cast<double>(trees_.size());
  }
  return out;
}

nlohmann::ordered_json RandomForestRegressor::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "random_forest_regressor";
  j["version"] = 1;
  j["params"] = params_to_json(params_);
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : trees_) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

std::unique_ptr<RandomForestRegressor> RandomForestRegressor::from_json(
    const nlohmann::ordered_json& j) {
  auto model =
      std::make_unique<RandomForestRegressor>(params_from_json(j.at("params")));
  for (const auto& t : j.at("trees")) {
    model->trees_.push_back(tree_from_json(t));
  }
  return model;
}

}  // namespace drift
