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
#include <set>

#include "drift/blobs.hpp"
#include "drift/dataset.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace drift;

namespace {

Schema blob_schema() {
  Schema schema;
  for (int i = 0; i < 6; ++i) {
    schema["x" + std::to_string(i)] = ColumnKind::kNumeric;
  }
  schema["c0"] = ColumnKind::kCategorical;
  schema["segment"] = ColumnKind::kCategorical;
  schema["label"] = ColumnKind::kCategorical;
  return schema;
}

}  // namespace

TEST_CASE("load_csv parses a small labeled table") {
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "small.csv";
  test::write_file(path, "f1,f2,y\n1.5,2,yes\n-3,0.25,no\n0,7,yes\n");
  Schema schema{{"f1", ColumnKind::kNumeric},
                {"f2", ColumnKind::kNumeric},
                {"y", ColumnKind::kCategorical}};
  const Dataset ds = load_csv(path.string(), schema, "y");
  CHECK(ds.n_rows() == 3);
  CHECK(ds.n_cols() == 2);
  CHECK(ds.class_set() == std::vector<std::string>{"no", "yes"});
  CHECK(ds.at(0, 0) == 1.5);
  CHECK(ds.labels() == std::vector<int>{1, 0, 1});
}

TEST_CASE("empty numeric cell becomes the missing marker") {
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "missing.csv";
  test::write_file(path, "f1,y\n,yes\n2,no\n");
  Schema schema{{"f1", ColumnKind::kNumeric}, {"y", ColumnKind::kCategorical}};
  const Dataset ds = load_csv(path.string(), schema, "y");
  CHECK(std::isnan(ds.at(0, 0)));
  CHECK(ds.at(1, 0) == 2.0);
}

TEST_CASE("label column absent from schema is a schema error") {
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "nolabel.csv";
  test::write_file(path, "f1,y\n1,yes\n");
  Schema schema{{"f1", ColumnKind::kNumeric}};
  CHECK_THROWS_AS(load_csv(path.string(), schema, "y"), SchemaError);
}

TEST_CASE("malformed numeric cell reports the row index") {
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "bad.csv";
  test::write_file(path, "f1,y\n1,yes\nnope,no\n");
  Schema schema{{"f1", ColumnKind::kNumeric}, {"y", ColumnKind::kCategorical}};
  try {
    load_csv(path.string(), schema, "y");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("rfc4180 quoting round-trips") {
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "quoted.csv";
  test::write_file(path,
                   "name,y\n\"a,b\",yes\n\"line\nbreak\",no\n\"qu\"\"ote\",yes\n");
  Schema schema{{"name", ColumnKind::kCategorical},
                {"y", ColumnKind::kCategorical}};
  const Dataset ds = load_csv(path.string(), schema, "y");
  REQUIRE(ds.n_rows() == 3);
  const auto& vocab = ds.columns()[0].vocab;
  CHECK(std::find(vocab.begin(), vocab.end(), "a,b") != vocab.end());
  CHECK(std::find(vocab.begin(), vocab.end(), "line\nbreak") != vocab.end());
  CHECK(std::find(vocab.begin(), vocab.end(), "qu\"ote") != vocab.end());
}

TEST_CASE("write then load is cell-identical") {
  const Dataset blobs = make_synthetic_blobs(300, 5);
  const auto dir = test::temp_dir("csv");
  const auto path = dir / "roundtrip.csv";
  write_csv(blobs, path.string(), "label");
  const Dataset back = load_csv(path.string(), blob_schema(), "label");
  REQUIRE(back.n_rows() == blobs.n_rows());
  REQUIRE(back.n_cols() == blobs.n_cols());
  CHECK(back.labels() == blobs.labels());
  CHECK(back.class_set() == blobs.class_set());
  for (std::size_t r = 0; r < back.n_rows(); ++r) {
    for (std::size_t c = 0; c < back.n_cols(); ++c) {
      CHECK(back.at(r, c) == blobs.at(r, c));
    }
  }
}

TEST_CASE("split_by_variable partitions rows and drops the column") {
  // 11 genres, one source value -> 10 target domains
  std::vector<Column> columns{{"genre", ColumnKind::kCategorical, {}},
                              {"x", ColumnKind::kNumeric, {}}};
  std::vector<std::string> genres;
  for (int g = 0; g < 11; ++g) genres.push_back("g" + std::to_string(g));
  std::sort(genres.begin(), genres.end());
  columns[0].vocab = genres;
  const std::size_t n = 110;
  FeatureTable table(columns, n);
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    table.set(r, 0, static_cast<double>(r % 11));
    table.set(r, 1, static_cast<double>(r));
    labels[r] = static_cast<int>(r % 2);
  }
  const Dataset ds(table, labels, {"a", "b"});

  SplitPlan plan;
  plan.split_variable = "genre";
  plan.source_value = genres[0];
  const SplitResult split = split_by_variable(ds, plan);
  CHECK(split.targets.size() == 10);
  CHECK(split.source.n_cols() == 1);
  std::size_t total = split.source.n_rows();
  for (const Dataset& t : split.targets) total += t.n_rows();
  CHECK(total == n);
}

TEST_CASE("split target groups collapse categories into domains") {
  std::vector<Column> columns{{"race", ColumnKind::kCategorical,
                               {"amer", "asian", "black", "other", "white"}},
                              {"x", ColumnKind::kNumeric, {}}};
  FeatureTable table(columns, 10);
  std::vector<int> labels(10, 0);
  labels[1] = 1;
  for (std::size_t r = 0; r < 10; ++r) {
    table.set(r, 0, static_cast<double>(r % 5));
    table.set(r, 1, 1.0);
  }
  const Dataset ds(table, labels, {"lo", "hi"});
  SplitPlan plan;
  plan.split_variable = "race";
  plan.source_value = "white";
  plan.target_groups = {{"black"}, {"amer", "asian", "other"}};
  const SplitResult split = split_by_variable(ds, plan);
  CHECK(split.targets.size() == 2);
  CHECK(split.targets[0].n_rows() == 2);
  CHECK(split.targets[1].n_rows() == 6);

  SUBCASE("groups must cover the remaining categories") {
    plan.target_groups = {{"black"}};
    CHECK_THROWS_AS(split_by_variable(ds, plan), ConfigError);
  }
}

TEST_CASE("single-category split variable yields an empty-domain error") {
  std::vector<Column> columns{
      {"only", ColumnKind::kCategorical, {"same"}},
      {"x", ColumnKind::kNumeric, {}}};
  FeatureTable table(columns, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    table.set(r, 0, 0.0);
    table.set(r, 1, 1.0);
  }
  const Dataset ds(table, {0, 1, 0, 1}, {"a", "b"});
  SplitPlan plan{"only", "same", {}};
  CHECK_THROWS_AS(split_by_variable(ds, plan), EmptyDomainError);
}

TEST_CASE("make_pools carves (n, 2n, n, n) disjoint pools") {
  const Dataset blobs = make_synthetic_blobs(2100, 3);
  const Pools pools = make_pools(blobs, 500, 17);
  CHECK(pools.primary_train.n_rows() == 500);
  CHECK(pools.source_pool.n_rows() == 1000);
  CHECK(pools.primary_valid.n_rows() == 500);
  CHECK(pools.primary_target.n_rows() == 500);

  SUBCASE("deterministic under the seed") {
    const Pools again = make_pools(blobs, 500, 17);
    for (std::size_t r = 0; r < 500; ++r) {
      for (std::size_t c = 0; c < blobs.n_cols(); ++c) {
        CHECK(again.primary_train.at(r, c) == pools.primary_train.at(r, c));
        CHECK(again.primary_target.at(r, c) == pools.primary_target.at(r, c));
      }
    }
  }

  SUBCASE("1999 rows cannot fill n=500 pools") {
    const Dataset small = make_synthetic_blobs(1999, 3);
    CHECK_THROWS_AS(make_pools(small, 500, 17), SizeError);
  }
}

TEST_CASE("sample_rows draws without replacement") {
  const Dataset ds = test::numeric_dataset(
      {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}}, {0, 1, 0, 1, 0});

  SUBCASE("k = n is a permutation of the rows") {
    const Dataset all = sample_rows(ds, 5, 9);
    std::multiset<double> in, out;
    for (std::size_t r = 0; r < 5; ++r) {
      in.insert(ds.at(r, 0));
      out.insert(all.at(r, 0));
    }
    CHECK(in == out);
  }

  SUBCASE("k = 0 keeps the columns") {
    const Dataset none = sample_rows(ds, 0, 9);
    CHECK(none.n_rows() == 0);
    CHECK(none.n_cols() == 1);
  }

  SUBCASE("k > n is a size error") {
    CHECK_THROWS_AS(sample_rows(ds, 6, 9), SizeError);
  }

  SUBCASE("distinct seeds reach distinct index sets") {
    // every 3-subset of 5 rows is reachable; two fixed seeds
    // spot-check different outcomes
    std::set<std::multiset<double>> outcomes;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Dataset draw = sample_rows(ds, 3, seed);
      std::multiset<double> rows;
      for (std::size_t r = 0; r < 3; ++r) rows.insert(draw.at(r, 0));
      outcomes.insert(rows);
    }
    // C(5,3) = 10 possible subsets; 40 seeds should hit most of them
    CHECK(outcomes.size() >= 8);
    const Dataset a = sample_rows(ds, 3, 1);
    const Dataset b = sample_rows(ds, 3, 2);
    std::multiset<double> ra, rb;
    for (std::size_t r = 0; r < 3; ++r) {
      ra.insert(a.at(r, 0));
      rb.insert(b.at(r, 0));
    }
    CHECK(ra != rb);
  }
}

TEST_CASE("dataset invariants are validated on construction") {
  FeatureTable table({{"x", ColumnKind::kNumeric, {}}}, 2);
  CHECK_THROWS_AS(Dataset(table, {0}, {"a", "b"}), SchemaError);
  CHECK_THROWS_AS(Dataset(table, {0, 2}, {"a", "b"}), SchemaError);
  CHECK_THROWS_AS(Dataset(table, {0, 0}, {}), SchemaError);

  FeatureTable cat({{"c", ColumnKind::kCategorical, {"u", "v"}}}, 1);
  cat.set(0, 0, 5.0);  // out of vocabulary
  CHECK_THROWS_AS(Dataset(cat, {0}, {"a", "b"}), SchemaError);
}
