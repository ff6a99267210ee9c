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

#include <cstddef>
#include <span>
#include <utility>

#include "drift/errors.hpp"

namespace drift {

// Inverse standard normal CDF; rational approximation refined by one
// Newton step, absolute error well below 1e-7.
double normal_quantile(double p);
double normal_cdf(double x);

struct EvalConfig {
  double alpha = 0.05;

  EvalConfig() = default;
  explicit EvalConfig(double alpha_) : alpha(alpha_) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ConfigError("alpha must lie in (0, 1)");
    }
  }

  // z_{alpha/2}: standard deviations spanning the confidence level.
  double z() const { return normal_quantile(1.0 - alpha / 2.0); }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

// Sampling noise of an accuracy measured on n i.i.d. rows:
// sqrt(acc * (1 - acc) / n).
double binomial_sigma(double acc, std::size_t n);

// acc +- z * sigma, clamped to [0, 1].
Interval confidence_interval(double acc, std::size_t n, const EvalConfig& cfg);

double mean_absolute_error(std::span<const double> true_accs,
                           std::span<const double> pred_accs);

// Mean absolute error hinged at the confidence interval of the measured
// accuracy: per pair, max(0, |true - pred| - z * sigma(true)).
double mae_ci(std::span<const double> true_accs,
              std::span<const double> pred_accs,
              std::span<const std::size_t> ns, const EvalConfig& cfg);

// Fraction of predictions falling inside the (closed) confidence
// interval of the measured accuracy.
double acc_ci(std::span<const double> true_accs,
              std::span<const double> pred_accs,
              std::span<const std::size_t> ns, const EvalConfig& cfg);

// Interval quality of the predictions' own intervals pred +- z *
// sigma(pred): coverage of the true values, and the mean unclamped
// width 2 * z * sigma(pred).
std::pair<double, double> picp_mpiw(std::span<const double> true_accs,
                                    std::span<const double> pred_accs,
                                    std::span<const std::size_t> pred_ns,
                                    const EvalConfig& cfg);

}  // namespace drift
