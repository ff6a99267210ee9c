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

#include <cmath>
#include <map>

#include "drift/forest.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace drift;

namespace {

// Independent oracle: exhaustive single decision stump (depth-1 tree).
// Scans every feature and every boundary between sorted values and
// returns the best training-set split accuracy.
double best_stump_accuracy(const Dataset& ds) {
  double best = 0.0;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    std::vector<std::pair<double, int>> cells;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      cells.emplace_back(ds.at(r, c), ds.labels()[r]);
    }
    std::sort(cells.begin(), cells.end());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i - 1].first == cells[i].first) continue;
      const double threshold = (cells[i - 1].first + cells[i].first) / 2.0;
      // majority label on each side, try both certificate orientations
      std::map<int, int> left, right;
      for (const auto& [v, y] : cells) ++(v < threshold ? left : right)[y];
      int left_best = 0, right_best = 0, left_n = 0, right_n = 0;
      for (const auto& [y, n] : left) {
        left_best = std::max(left_best, n);
        left_n += n;
      }
      for (const auto& [y, n] : right) {
        right_best = std::max(right_best, n);
        right_n += n;
      }
      best = std::max(best, static_cast<double>(left_best + right_best) /
                                static_cast<double>(left_n + right_n));
    }
  }
  return best;
}

double accuracy_on(const RandomForestClassifier& model, const Dataset& ds) {
  return model.accuracy(ds);
}

}  // namespace

TEST_CASE("forest separates two Gaussian blobs at >= 0.95") {
  const Dataset train = test::two_blobs(200, 2.0, 1);
  const Dataset test_set = test::two_blobs(200, 2.0, 2);

  // the stump oracle sets the floor a full forest must clear
  const double stump = best_stump_accuracy(train);
  CHECK(stump >= 0.9);

  RandomForestClassifier forest({100, 0, 1, 0, 7});
  forest.fit(train);
  const double acc = accuracy_on(forest, test_set);
  CHECK(acc >= 0.95);
  CHECK(acc >= stump - 0.1);
}

TEST_CASE("single-class training data is a degenerate-model error") {
  const Dataset one = test::numeric_dataset({{1.0}, {2.0}}, {0, 0});
  RandomForestClassifier forest({10, 0, 1, 0, 1});
  CHECK_THROWS_AS(forest.fit(one), DegenerateError);

  const Dataset single_row = test::numeric_dataset({{1.0}}, {0});
  CHECK_THROWS_AS(forest.fit(single_row), DegenerateError);
}

TEST_CASE("XOR needs depth 2 and the forest fits it exactly") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  const double corners[4][3] = {
      {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}};
  for (int rep = 0; rep < 50; ++rep) {
    for (const auto& corner : corners) {
      rows.push_back({corner[0], corner[1]});
      labels.push_back(static_cast<int>(corner[2]));
    }
  }
  const Dataset xor_ds = test::numeric_dataset(rows, labels);

  // exhaustive stump scan proves depth 1 cannot separate XOR
  CHECK(best_stump_accuracy(xor_ds) == doctest::Approx(0.5));

  RandomForestClassifier forest({30, 0, 1, 2, 3});
  forest.fit(xor_ds);
  CHECK(accuracy_on(forest, xor_ds) == doctest::Approx(1.0));
}

TEST_CASE("probability rows sum to one and argmax matches predict") {
  const Dataset train = test::two_blobs(150, 1.0, 5);
  RandomForestClassifier forest({40, 0, 1, 0, 9});
  forest.fit(train);
  const Dataset query = test::two_blobs(80, 1.0, 6);
  const ProbabilityMatrix probs = forest.predict_proba(query.features());
  const auto labels = forest.predict(query.features());
  for (std::size_t r = 0; r < probs.n_rows(); ++r) {
    CHECK(probs.row_sum(r) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(labels[r] == probs.argmax(r));
    for (std::size_t c = 0; c < probs.n_classes(); ++c) {
      CHECK(probs.at(r, c) >= 0.0);
      CHECK(probs.at(r, c) <= 1.0);
    }
  }
}

TEST_CASE("forest construction is deterministic under a fixed seed") {
  const Dataset train = test::two_blobs(100, 1.5, 8);
  RandomForestClassifier a({25, 0, 1, 0, 42});
  RandomForestClassifier b({25, 0, 1, 0, 42});
  a.fit(train);
  b.fit(train);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("missing cells route through splits without crashing") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    double v = rng.normal(label == 0 ? -1.5 : 1.5, 1.0);
    if (i % 7 == 0) v = missing_numeric();
    rows.push_back({v, rng.normal(0.0, 1.0)});
    labels.push_back(label);
  }
  const Dataset train = test::numeric_dataset(rows, labels);
  RandomForestClassifier forest({30, 0, 1, 0, 11});
  forest.fit(train);
  const ProbabilityMatrix probs = forest.predict_proba(train.features());
  CHECK(probs.n_rows() == 200);
  CHECK(forest.accuracy(train) > 0.8);
}

TEST_CASE("serialization round-trips predictions exactly") {
  const Dataset train = test::two_blobs(120, 1.0, 12);
  RandomForestClassifier forest({20, 0, 1, 0, 13});
  forest.fit(train);
  const auto restored = RandomForestClassifier::from_json(forest.to_json());
  const Dataset query = test::two_blobs(40, 1.0, 14);
  const ProbabilityMatrix a = forest.predict_proba(query.features());
  const ProbabilityMatrix b = restored->predict_proba(query.features());
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    for (std::size_t c = 0; c < a.n_classes(); ++c) {
      CHECK(a.at(r, c) == b.at(r, c));
    }
  }
}

TEST_CASE("regressor handles constant and linear targets") {
  SUBCASE("constant targets predict the constant") {
    std::vector<std::vector<double>> x(30, std::vector<double>{1.0});
    for (std::size_t i = 0; i < x.size(); ++i) x[i][0] = static_cast<double>(i);
    const std::vector<double> y(30, 3.25);
    RandomForestRegressor reg({50, 0, 1, 0, 3});
    reg.fit(x, y);
    CHECK(reg.predict({{15.0}})[0] == doctest::Approx(3.25));
  }

  SUBCASE("y = x interpolates near the midpoint") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) {
      const double v = static_cast<double>(i) / 99.0;
      x.push_back({v});
      y.push_back(v);
    }
    RandomForestRegressor reg({100, 0, 1, 0, 5});
    reg.fit(x, y);
    const double pred = reg.predict({{0.5}})[0];
    // 1-nearest-neighbour oracle: the closest training target to 0.5
    double oracle = y[0];
    double best = 1e9;
    for (int i = 0; i < 100; ++i) {
      if (std::abs(x[i][0] - 0.5) < best) {
        best = std::abs(x[i][0] - 0.5);
        oracle = y[i];
      }
    }
    CHECK(std::abs(pred - 0.5) <= 0.1);
    CHECK(std::abs(pred - oracle) <= 0.1);
  }

  SUBCASE("single training point predicts that target everywhere") {
    RandomForestRegressor reg({10, 0, 1, 0, 7});
    reg.fit({{2.0}}, {0.7});
    CHECK(reg.predict({{-100.0}})[0] == doctest::Approx(0.7));
    CHECK(reg.predict({{100.0}})[0] == doctest::Approx(0.7));
  }

  SUBCASE("empty input is a size error") {
    RandomForestRegressor reg({10, 0, 1, 0, 7});
    CHECK_THROWS_AS(reg.fit({}, {}), SizeError);
  }
}

TEST_CASE("categorical one-vs-rest splits carry their weight") {
  // label perfectly determined by one category code
  std::vector<Column> columns{
      {"c", ColumnKind::kCategorical, {"p", "q", "r"}},
      {"noise", ColumnKind::kNumeric, {}}};
  FeatureTable table(columns, 150);
  std::vector<int> labels(150);
  Rng rng(21);
  for (std::size_t r = 0; r < 150; ++r) {
    const int code = static_cast<int>(r % 3);
    table.set(r, 0, code);
    table.set(r, 1, rng.normal(0.0, 1.0));
    labels[r] = code == 1 ? 1 : 0;
  }
  const Dataset ds(table, labels, {"no", "yes"});
  RandomForestClassifier forest({30, 0, 1, 0, 17});
  forest.fit(ds);
  CHECK(forest.accuracy(ds) == doctest::Approx(1.0));
}
