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

// Times the OpenMP kernels against their serial reference twins and
// checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <functional>

#include "drift/blobs.hpp"
#include "drift/forest.hpp"
#include "drift/harness.hpp"
#include "drift/parallel.hpp"

#include "CLI11.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const char* kernel, double serial_ms, double omp_ms, bool equal) {
  std::printf("%-24s %10.1f ms %10.1f ms %8.2fx   %s\n", kernel, serial_ms,
              omp_ms, serial_ms / omp_ms, equal ? "match" : "MISMATCH");
}

bool trees_equal(const std::vector<drift::Tree>& a,
                 const std::vector<drift::Tree>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].nodes.size() != b[t].nodes.size()) return false;
    for (std::size_t n = 0; n < a[t].nodes.size(); ++n) {
      const drift::TreeNode& x = a[t].nodes[n];
      const drift::TreeNode& y = b[t].nodes[n];
      if (x.feature != y.feature || x.threshold != y.threshold ||
          x.category != y.category || x.left != y.left || x.right != y.right ||
          x.dist != y.dist || x.value != y.value) {
        return false;
      }
    }
  }
  return true;
}

bool probs_equal(const drift::ProbabilityMatrix& a,
                 const drift::ProbabilityMatrix& b) {
  if (a.n_rows() != b.n_rows() || a.n_classes() != b.n_classes()) return false;
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    for (std::size_t c = 0; c < a.n_classes(); ++c) {
      if (a.at(r, c) != b.at(r, c)) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial-vs-OpenMP kernel benchmark"};
  std::size_t rows = 6000;
  int trees = 60;
  std::size_t scenarios = 8;
  int jobs = 0;
  app.add_option("--rows", rows, "training rows for the forest kernels");
  app.add_option("--trees", trees, "forest size");
  app.add_option("--scenarios", scenarios, "scenarios per kind");
  app.add_option("--jobs", jobs, "worker threads (0 = default)");
  CLI11_PARSE(app, argc, argv);
  if (jobs > 0) drift::set_max_threads(jobs);

  const drift::Dataset blobs = drift::make_synthetic_blobs(rows, 7);
  drift::ForestParams params;
  params.n_trees = trees;
  params.seed = 11;

  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp",
              "speedup");

  {
    std::vector<drift::Tree> serial_trees, omp_trees;
    const double serial_ms = time_ms([&] {
      serial_trees = drift::reference::fit_forest_trees(blobs, params);
    });
    const double omp_ms =
        time_ms([&] { omp_trees = drift::fit_forest_trees(blobs, params); });
    report("forest_fit", serial_ms, omp_ms,
           trees_equal(serial_trees, omp_trees));

    drift::ProbabilityMatrix serial_probs, omp_probs;
    const double serial_pred_ms = time_ms([&] {
      serial_probs = drift::reference::forest_predict_proba(
          serial_trees, blobs.features(), blobs.n_classes());
    });
    const double omp_pred_ms = time_ms([&] {
      omp_probs = drift::forest_predict_proba(omp_trees, blobs.features(),
                                              blobs.n_classes());
    });
    report("forest_predict", serial_pred_ms, omp_pred_ms,
           probs_equal(serial_probs, omp_probs));
  }

  {
    drift::Protocol proto;
    proto.n_samples = 200;
    proto.scenarios_per_kind = scenarios;
    proto.runs = 1;
    proto.primary_forest.n_trees = 40;
    const drift::Dataset source = drift::make_synthetic_blobs(1200, 9);
    const drift::Pools pools = drift::make_pools(source, proto.n_samples, 3);
    const drift::PrimaryBundle primary = drift::fit_primary(pools, proto, 5);

    std::map<drift::ScenarioKind, drift::MetaSet> serial_meta, omp_meta;
    const double serial_ms = time_ms([&] {
      serial_meta = drift::reference::build_meta_sets(pools, *primary.model,
                                                      proto, {}, 13);
    });
    const double omp_ms = time_ms([&] {
      omp_meta = drift::build_meta_sets(pools, *primary.model, proto, {}, 13);
    });
    bool equal = serial_meta.size() == omp_meta.size();
    for (const auto& [kind, set] : serial_meta) {
      if (!equal) break;
      const auto& other = omp_meta.at(kind);
      equal = set.entries.size() == other.entries.size();
      for (std::size_t i = 0; equal && i < set.entries.size(); ++i) {
        equal = set.entries[i].true_accuracy == other.entries[i].true_accuracy &&
                set.entries[i].scenario_id == other.entries[i].scenario_id;
      }
    }
    report("meta_set_build", serial_ms, omp_ms, equal);
  }

  std::printf("threads: %d\n", drift::max_threads());
  return 0;
}
