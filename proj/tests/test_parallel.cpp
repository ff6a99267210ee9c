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

#include <atomic>
#include <numeric>

#include "drift/blobs.hpp"
#include "drift/forest.hpp"
#include "drift/parallel.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace drift;

TEST_CASE("parallel_for covers every slot exactly once") {
  std::vector<std::atomic<int>> hits(997);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for matches serial_for on slot outputs") {
  std::vector<double> parallel_out(500), serial_out(500);
  const auto body = [](std::size_t i) {
    Rng rng(derive_seed(123, i));
    double acc = 0.0;
    for (int k = 0; k < 50; ++k) acc += rng.normal();
    return acc;
  };
  parallel_for(parallel_out.size(),
               [&](std::size_t i) { parallel_out[i] = body(i); });
  serial_for(serial_out.size(),
             [&](std::size_t i) { serial_out[i] = body(i); });
  CHECK(parallel_out == serial_out);
}

TEST_CASE("exceptions inside parallel_for surface on the caller") {
  CHECK_THROWS_AS(parallel_for(64,
                               [](std::size_t i) {
                                 if (i == 13) throw SizeError("boom");
                               }),
                  SizeError);
}

TEST_CASE("forest kernels equal their serial reference") {
  const Dataset blobs = make_synthetic_blobs(800, 3);
  ForestParams params{24, 0, 1, 0, 5};
  const auto omp_trees = fit_forest_trees(blobs, params);
  const auto ref_trees = reference::fit_forest_trees(blobs, params);
  REQUIRE(omp_trees.size() == ref_trees.size());
  for (std::size_t t = 0; t < omp_trees.size(); ++t) {
    REQUIRE(omp_trees[t].nodes.size() == ref_trees[t].nodes.size());
    for (std::size_t n = 0; n < omp_trees[t].nodes.size(); ++n) {
      const TreeNode& a = omp_trees[t].nodes[n];
      const TreeNode& b = ref_trees[t].nodes[n];
      CHECK(a.feature == b.feature);
      CHECK(a.threshold == b.threshold);
      CHECK(a.category == b.category);
      CHECK(a.left == b.left);
      CHECK(a.right == b.right);
      CHECK(a.dist == b.dist);
    }
  }

  const ProbabilityMatrix omp_probs =
      forest_predict_proba(omp_trees, blobs.features(), blobs.n_classes());
  const ProbabilityMatrix ref_probs = reference::forest_predict_proba(
      ref_trees, blobs.features(), blobs.n_classes());
  for (std::size_t r = 0; r < omp_probs.n_rows(); ++r) {
    for (std::size_t c = 0; c < omp_probs.n_classes(); ++c) {
      CHECK(omp_probs.at(r, c) == ref_probs.at(r, c));
    }
  }
}

TEST_CASE("thread cap setting round-trips") {
  const int before = max_threads();
  set_max_threads(1);
  CHECK(max_threads() == 1);
  set_max_threads(0);  // restore default
  CHECK(max_threads() >= 1);
  set_max_threads(before);
}
