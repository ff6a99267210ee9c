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

#include "drift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace drift {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("normal_quantile requires p in (0, 1)");
  }
  // Acklam's rational approximation (~1e-9), then one Newton step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double binomial_sigma(double acc, std::size_t n) {
  if (n == 0) throw SizeError("binomial_sigma requires n >= 1");
  return std::sqrt(acc * (1.0 - acc) / static_cast<double>(n));
}

Interval confidence_interval(double acc, std::size_t n,
                             const EvalConfig& cfg) {
  const double half = cfg.z() * binomial_sigma(acc, n);
  return Interval{std::max(0.0, acc - half), std::min(1.0, acc + half)};
}

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) {
    throw SizeError("metric input lengths differ: " + std::to_string(a) +
                    ", " + std::to_string(b) + ", " + std::to_string(c));
  }
  if (a == 0) throw SizeError("metric inputs are empty");
}

}  // namespace

double mean_absolute_error(std::span<const double> true_accs,
                           std::span<const double> pred_accs) {
  check_lengths(true_accs.size(), pred_accs.size(), true_accs.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < true_accs.size(); ++k) {
    sum += std::abs(true_accs[k] - pred_accs[k]);
  }
  return sum / static_cast<double>(true_accs.size());
}

double mae_ci(std::span<const double> true_accs,
              std::span<const double> pred_accs,
              std::span<const std::size_t> ns, const EvalConfig& cfg) {
  check_lengths(true_accs.size(), pred_accs.size(), ns.size());
  const double z = cfg.z();
  double sum = 0.0;
  for (std::size_t k = 0; k < true_accs.size(); ++k) {
    const double err = std::abs(true_accs[k] - pred_accs[k]);
    sum += std::max(0.0, err - z * binomial_sigma(true_accs[k], ns[k]));
  }
  return sum / static_cast<double>(true_accs.size());
}

double acc_ci(std::span<const double> true_accs,
              std::span<const double> pred_accs,
              std::span<const std::size_t> ns, const EvalConfig& cfg) {
  check_lengths(true_accs.size(), pred_accs.size(), ns.size());
  std::size_t inside = 0;
  for (std::size_t k = 0; k < true_accs.size(); ++k) {
    if (confidence_interval(true_accs[k], ns[k], cfg).contains(pred_accs[k])) {
      ++inside;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(true_accs.size());
}

std::pair<double, double> picp_mpiw(std::span<const double> true_accs,
                                    std::span<const double> pred_accs,
                                    std::span<const std::size_t> pred_ns,
                                    const EvalConfig& cfg) {
  check_lengths(true_accs.size(), pred_accs.size(), pred_ns.size());
  const double z = cfg.z();
  std::size_t covered = 0;
  double width_sum = 0.0;
  for (std::size_t k = 0; k < true_accs.size(); ++k) {
    const double sigma = binomial_sigma(pred_accs[k], pred_ns[k]);
    if (std::abs(true_accs[k] - pred_accs[k]) <= z * sigma) ++covered;
    width_sum += 2.0 * z * sigma;
  }
  const double n = static_cast<double>(true_accs.size());
  return {static_cast<double>(covered) / n, width_sum / n};
}

}  // namespace drift
