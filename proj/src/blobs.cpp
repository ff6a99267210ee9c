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

#include "drift/blobs.hpp"

#include <cmath>

#include "drift/rng.hpp"

namespace drift {

Dataset make_synthetic_blobs(std::size_t n_rows, std::uint64_t seed) {
  std::vector<Column> columns;
  for (int i = 0; i < 6; ++i) {
    columns.push_back({"x" + std::to_string(i), ColumnKind::kNumeric, {}});
  }
  columns.push_back({"c0", ColumnKind::kCategorical, {"u", "v", "w", "x"}});
  columns.push_back({"segment", ColumnKind::kCategorical, {"a", "b", "c"}});

  // Column design mirrors real tabular measurements: the strong columns
  // are tight near-zero Gaussians (so part of a sign flip stays
  // in-range and yields confidently wrong predictions), the weak
  // columns are right-skewed log-normals on distinct positive ranges
  // (so off-distribution cell values land in sparse territory).
  const double base[6] = {2.2, 2.6, 3.0, 11.0, 14.0, 17.0};
  const double class_weight[6] = {0.45, 0.45, 0.45, 0.3, 0.3, 0.3};
  const double sigma[6] = {0.6, 0.6, 0.6, 0.45, 0.45, 0.45};

  FeatureTable table(std::move(columns), n_rows);
  std::vector<int> labels(n_rows);
  Rng rng(derive_seed(seed, "blobs"));

  for (std::size_t r = 0; r < n_rows; ++r) {
    const bool positive = rng.bernoulli(0.5);
    labels[r] = positive ? 1 : 0;  // class set {"neg", "pos"}

    const double u_seg = rng.next_double();
    const int segment = u_seg < 0.6 ? 0 : (u_seg < 0.8 ? 1 : 2);
    const double seg_offset = segment == 0 ? 0.0 : (segment == 1 ? 0.25 : -0.25);

    const double sign = positive ? 1.0 : -1.0;
    // a few percent of rows are label-independent background scatter,
    // the heavy tails every real measurement table carries
    const bool background = rng.bernoulli(0.08);
    for (int i = 0; i < 3; ++i) {
      const double v =
          background
              ? rng.uniform(base[i] - 8.0, base[i] + 8.0)
              : rng.normal(base[i] + sign * class_weight[i] + seg_offset,
                           sigma[i]);
      table.set(r, i, v);
    }
    for (int i = 3; i < 6; ++i) {
      const double log_mean =
          std::log(base[i]) + sign * class_weight[i] + 0.3 * seg_offset;
      const double v = background
                           ? std::exp(rng.uniform(std::log(base[i]) - 3.0,
                                                  std::log(base[i]) + 3.0))
                           : std::exp(rng.normal(log_mean, sigma[i]));
      table.set(r, i, v);
    }

    // c0 skews toward 'x' for positives and 'u' for negatives
    const double u_cat = rng.next_double();
    int code;
    if (positive) {
      code = u_cat < 0.1 ? 0 : (u_cat < 0.3 ? 1 : (u_cat < 0.6 ? 2 : 3));
    } else {
      code = u_cat < 0.4 ? 0 : (u_cat < 0.7 ? 1 : (u_cat < 0.9 ? 2 : 3));
    }
    table.set(r, 6, static_cast<double>(code));
    table.set(r, 7, static_cast<double>(segment));
  }
  return Dataset(std::move(table), std::move(labels), {"neg", "pos"});
}

}  // namespace drift
