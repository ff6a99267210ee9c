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

#include "drift/shift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "drift/rng.hpp"

namespace drift {

namespace {

const std::array<std::pair<ShiftKind, const char*>, 14> kKindNames = {{
    {ShiftKind::kSwappedValues, "SwappedValues"},
    {ShiftKind::kScaling, "Scaling"},
    {ShiftKind::kOutliers, "Outliers"},
    {ShiftKind::kMissingValues, "MissingValues"},
    {ShiftKind::kSmallGaussian, "SmallGaussian"},
    {ShiftKind::kMediumGaussian, "MediumGaussian"},
    {ShiftKind::kFlipSign, "FlipSign"},
    {ShiftKind::kConstantNumeric, "ConstantNumeric"},
    {ShiftKind::kPlusMinusSomePercent, "PlusMinusSomePercent"},
    {ShiftKind::kJointSubsampling, "JointSubsampling"},
    {ShiftKind::kSubsamplingNumeric, "SubsamplingNumeric"},
    {ShiftKind::kSubsamplingCategorical, "SubsamplingCategorical"},
    {ShiftKind::kKnockOut, "KnockOut"},
    {ShiftKind::kIdentity, "Identity"},
}};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  std::size_t present = 0;
};

ColumnStats numeric_stats(const Dataset& ds, std::size_t col) {
  ColumnStats stats;
  std::vector<double> values;
  values.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    const double v = ds.at(r, col);
    if (!std::isnan(v)) values.push_back(v);
  }
  stats.present = values.size();
  if (values.empty()) return stats;
  double sum = 0.0, sum_sq = 0.0;
  stats.min = values[0];
  stats.max = values[0];
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
    stats.min = std::min(stats.min, v);
    stats.max = std::max(stats.max, v);
  }
  const double n = static_cast<double>(values.size());
  stats.mean = sum / n;
  const double var = sum_sq / n - stats.mean * stats.mean;
  stats.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  stats.median = m % 2 ? values[m / 2]
                       : (values[m / 2 - 1] + values[m / 2]) / 2.0;
  return stats;
}

// Noise scales fall back to 1 on constant columns so the shift still
// moves the data.
double scale_of(const ColumnStats& stats) {
  return stats.stddev > 0.0 ? stats.stddev : 1.0;
}

std::vector<std::size_t> numeric_columns(const Dataset& ds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (ds.columns()[c].kind == ColumnKind::kNumeric) cols.push_back(c);
  }
  return cols;
}

std::vector<std::size_t> categorical_columns(const Dataset& ds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (ds.columns()[c].kind == ColumnKind::kCategorical) cols.push_back(c);
  }
  return cols;
}

std::vector<std::size_t> all_columns(const Dataset& ds) {
  std::vector<std::size_t> cols(ds.n_cols());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

std::vector<std::size_t> select_rows(const Dataset& ds, const ShiftSpec& spec) {
  Rng rng(derive_seed(spec.seed, "rows"));
  auto rows = rng.sample_without_replacement(
      ds.n_rows(), fraction_count(spec.sample_fraction, ds.n_rows()));
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::size_t> select_features(
    const std::vector<std::size_t>& eligible, const ShiftSpec& spec) {
  if (spec.feature_fraction <= 0.0) return {};
  const std::size_t count = std::max<std::size_t>(
      1, fraction_count(spec.feature_fraction, eligible.size()));
  Rng rng(derive_seed(spec.seed, "features"));
  auto picks = rng.sample_without_replacement(eligible.size(), count);
  std::vector<std::size_t> cols(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) cols[i] = eligible[picks[i]];
  std::sort(cols.begin(), cols.end());
  return cols;
}

struct PerturbationContext {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> features;
  Rng noise;
  Rng per_feature;
};

PerturbationContext perturbation_context(const Dataset& ds,
                                         const ShiftSpec& spec,
                                         std::vector<std::size_t> eligible,
                                         const char* what) {
  if (eligible.empty()) {
    throw EligibilityError(std::string(shift_kind_name(spec.kind)) +
                           " requires " + what + " columns");
  }
  return PerturbationContext{select_rows(ds, spec),
                             select_features(eligible, spec),
                             Rng(derive_seed(spec.seed, "noise")),
                             Rng(derive_seed(spec.seed, "per-feature"))};
}

// Applies fn(cell) to every affected non-missing cell, feature-major so
// the noise stream is consumed in a fixed order.
template <typename PerFeature>
void perturb_cells(FeatureTable& table, const PerturbationContext& ctx,
                   PerFeature&& per_feature) {
  for (std::size_t col : ctx.features) {
    auto cell_fn = per_feature(col);
    for (std::size_t row : ctx.rows) {
      const double v = table.at(row, col);
      const double next = cell_fn(v);
      if (!is_missing(v, table.column(col).kind)) table.set(row, col, next);
    }
  }
}

ShiftedDataset finish_perturbation(const Dataset& input, FeatureTable table,
                                   const ShiftSpec& spec,
                                   PerturbationContext ctx) {
  ShiftedDataset out{
      Dataset(std::move(table), input.labels(), input.class_set()), spec,
      std::move(ctx.rows), std::move(ctx.features)};
  return out;
}

ShiftedDataset apply_swapped_values(const Dataset& ds, const ShiftSpec& spec) {
  // Swappable groups: all numeric columns; categorical columns bucketed
  // by vocabulary so codes stay valid after the exchange.
  std::vector<std::vector<std::size_t>> groups;
  {
    const auto numeric = numeric_columns(ds);
    if (numeric.size() >= 2) groups.push_back(numeric);
    std::map<std::vector<std::string>, std::vector<std::size_t>> by_vocab;
    for (std::size_t c : categorical_columns(ds)) {
      by_vocab[ds.columns()[c].vocab].push_back(c);
    }
    for (auto& [vocab, cols] : by_vocab) {
      if (cols.size() >= 2) groups.push_back(cols);
    }
  }
  if (groups.empty()) {
    throw EligibilityError(
        "SwappedValues requires two columns of the same kind");
  }
  std::size_t d_eligible = 0, capacity = 0;
  for (const auto& g : groups) {
    d_eligible += g.size();
    capacity += g.size() / 2;
  }
  const std::size_t want =
      spec.feature_fraction > 0.0
          ? std::max<std::size_t>(
                1, fraction_count(spec.feature_fraction, d_eligible))
          : 0;
  const std::size_t n_pairs =
      want == 0 ? 0 : std::min(capacity, std::max<std::size_t>(1, want / 2));

  Rng feature_rng(derive_seed(spec.seed, "features"));
  for (auto& g : groups) feature_rng.shuffle(g);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> group_order(groups.size());
  std::iota(group_order.begin(), group_order.end(), std::size_t{0});
  while (pairs.size() < n_pairs) {
    // draw a group with remaining capacity, then pop one pair from it
    std::vector<std::size_t> open;
    for (std::size_t g : group_order) {
      if (groups[g].size() >= 2) open.push_back(g);
    }
    const std::size_t g = open[feature_rng.index(open.size())];
    const std::size_t a = groups[g].back();
    groups[g].pop_back();
    const std::size_t b = groups[g].back();
    groups[g].pop_back();
    pairs.emplace_back(a, b);
  }

  auto rows = select_rows(ds, spec);
  FeatureTable table = ds.features();
  for (const auto& [a, b] : pairs) {
    for (std::size_t row : rows) {
      const double va = table.at(row, a);
      table.set(row, a, table.at(row, b));
      table.set(row, b, va);
    }
  }
  std::vector<std::size_t> affected;
  for (const auto& [a, b] : pairs) {
    affected.push_back(a);
    affected.push_back(b);
  }
  std::sort(affected.begin(), affected.end());
  return ShiftedDataset{
      Dataset(std::move(table), ds.labels(), ds.class_set()), spec,
      std::move(rows), std::move(affected)};
}

ShiftedDataset apply_missing_values(const Dataset& ds, const ShiftSpec& spec) {
  auto ctx = perturbation_context(ds, spec, all_columns(ds), "any");
  FeatureTable table = ds.features();
  for (std::size_t col : ctx.features) {
    const double marker = table.column(col).kind == ColumnKind::kNumeric
                              ? missing_numeric()
                              : kMissingCategory;
    for (std::size_t row : ctx.rows) table.set(row, col, marker);
  }
  return finish_perturbation(ds, std::move(table), spec, std::move(ctx));
}

ShiftedDataset apply_numeric_perturbation(const Dataset& ds,
                                          const ShiftSpec& spec) {
  auto ctx = perturbation_context(ds, spec, numeric_columns(ds), "numeric");
  FeatureTable table = ds.features();
  auto& per_feature = ctx.per_feature;
  auto& noise = ctx.noise;

  switch (spec.kind) {
    case ShiftKind::kScaling:
      perturb_cells(table, ctx, [&](std::size_t col) {
        // one signed constant per feature, magnitude 1..10 column stds
        const double magnitude =
            per_feature.uniform(1.0, 10.0) * scale_of(numeric_stats(ds, col));
        const double delta = per_feature.bernoulli(0.5) ? magnitude
                                                        : -magnitude;
        return [delta](double v) { return v + delta; };
      });
      break;
    case ShiftKind::kOutliers:
      perturb_cells(table, ctx, [&](std::size_t col) {
        const double sigma =
            per_feature.uniform(1.0, 5.0) * scale_of(numeric_stats(ds, col));
        return [&noise, sigma](double v) { return v + noise.normal(0.0, sigma); };
      });
      break;
    case ShiftKind::kSmallGaussian:
    case ShiftKind::kMediumGaussian: {
      const double tier = spec.kind == ShiftKind::kSmallGaussian ? 0.1 : 1.0;
      perturb_cells(table, ctx, [&](std::size_t col) {
        const double sigma = tier * scale_of(numeric_stats(ds, col));
        return [&noise, sigma](double v) { return v + noise.normal(0.0, sigma); };
      });
      break;
    }
    case ShiftKind::kFlipSign:
      perturb_cells(table, ctx,
                    [](std::size_t) { return [](double v) { return -v; }; });
      break;
    case ShiftKind::kConstantNumeric:
      perturb_cells(table, ctx, [&](std::size_t col) {
        // one signed constant per feature on the same scale-free
        // footing as Scaling: mean +- (1..10) column stds
        const ColumnStats stats = numeric_stats(ds, col);
        const double offset =
            per_feature.uniform(1.0, 10.0) * scale_of(stats);
        const double constant =
            stats.mean + (per_feature.bernoulli(0.5) ? offset : -offset);
        return [constant](double) { return constant; };
      });
      break;
    case ShiftKind::kPlusMinusSomePercent: {
      const double p = spec.percent;
      perturb_cells(table, ctx, [&](std::size_t) {
        return [&noise, p](double v) {
          return v * (noise.bernoulli(0.5) ? 1.0 + p : 1.0 - p);
        };
      });
      break;
    }
    default:
      throw DriftError("not a numeric perturbation");
  }
  return finish_perturbation(ds, std::move(table), spec, std::move(ctx));
}

ShiftedDataset make_subsample(const Dataset& ds, const ShiftSpec& spec,
                              const std::vector<bool>& keep,
                              std::vector<std::size_t> affected_features) {
  std::vector<std::size_t> kept, removed;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    (keep[r] ? kept : removed).push_back(r);
  }
  std::set<int> classes;
  for (std::size_t r : kept) classes.insert(ds.labels()[r]);
  if (classes.size() < 2) {
    throw DegenerateError(std::string(shift_kind_name(spec.kind)) +
                          " left fewer than two classes");
  }
  return ShiftedDataset{ds.take_rows(kept), spec, std::move(removed),
                        std::move(affected_features)};
}

ShiftedDataset apply_joint_subsampling(const Dataset& ds,
                                       const ShiftSpec& spec) {
  const auto numeric = numeric_columns(ds);
  if (numeric.empty()) {
    throw EligibilityError("JointSubsampling requires numeric columns");
  }
  // squared standardized distance from the column means, averaged over
  // numeric columns; missing cells contribute 0
  std::vector<ColumnStats> stats;
  stats.reserve(numeric.size());
  for (std::size_t c : numeric) stats.push_back(numeric_stats(ds, c));
  std::vector<double> dist(ds.n_rows(), 0.0);
  double max_dist = 0.0;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double v = ds.at(r, numeric[i]);
      if (std::isnan(v) || stats[i].stddev <= 0.0) continue;
      const double z = (v - stats[i].mean) / stats[i].stddev;
      sum += z * z;
    }
    dist[r] = sum / static_cast<double>(numeric.size());
    max_dist = std::max(max_dist, dist[r]);
  }

  Rng rng(derive_seed(spec.seed, "subsample"));
  std::vector<bool> keep(ds.n_rows());
  if (max_dist <= 0.0) {
    // all rows sit at the mean; degenerate flat keep probability
    for (std::size_t r = 0; r < ds.n_rows(); ++r) keep[r] = rng.bernoulli(0.5);
  } else {
    // pick tau by bisection so the expected kept fraction is ~0.5
    double lo = 1e-6, hi = 1e6;
    for (int iter = 0; iter < 200; ++iter) {
      const double tau = 0.5 * (lo + hi);
      double expect = 0.0;
      for (double d : dist) expect += std::exp(-d / tau);
      expect /= static_cast<double>(dist.size());
      (expect < 0.5 ? lo : hi) = tau;
    }
    const double tau = 0.5 * (lo + hi);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      keep[r] = rng.bernoulli(std::exp(-dist[r] / tau));
    }
  }
  return make_subsample(ds, spec, keep, {});
}

// Per-feature keep probabilities combine through their geometric mean,
// so the expected kept fraction does not collapse as more features are
// selected (one draw per row).
ShiftedDataset subsample_by_feature_probs(
    const Dataset& ds, const ShiftSpec& spec,
    const std::vector<std::size_t>& features,
    const std::vector<std::vector<double>>& probs) {
  Rng rng(derive_seed(spec.seed, "subsample"));
  std::vector<bool> keep(ds.n_rows());
  const double inv_k = 1.0 / static_cast<double>(features.size());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    double product = 1.0;
    for (std::size_t i = 0; i < features.size(); ++i) product *= probs[i][r];
    keep[r] = rng.bernoulli(std::pow(product, inv_k));
  }
  return make_subsample(ds, spec, keep, features);
}

ShiftedDataset apply_subsampling_numeric(const Dataset& ds,
                                         const ShiftSpec& spec) {
  const auto eligible = numeric_columns(ds);
  if (eligible.empty()) {
    throw EligibilityError("SubsamplingNumeric requires numeric columns");
  }
  const auto features = select_features(eligible, spec);
  // rows below the per-feature median survive with probability 0.1,
  // the rest with 0.9
  std::vector<std::vector<double>> probs(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double median = numeric_stats(ds, features[i]).median;
    probs[i].resize(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      const double v = ds.at(r, features[i]);
      probs[i][r] = std::isnan(v) ? 0.5 : (v >= median ? 0.9 : 0.1);
    }
  }
  return subsample_by_feature_probs(ds, spec, features, probs);
}

ShiftedDataset apply_subsampling_categorical(const Dataset& ds,
                                             const ShiftSpec& spec) {
  const auto eligible = categorical_columns(ds);
  if (eligible.empty()) {
    throw EligibilityError("SubsamplingCategorical requires categorical columns");
  }
  const auto features = select_features(eligible, spec);
  Rng range_rng(derive_seed(spec.seed, "ranges"));
  // a contiguous code range covering ~half the vocabulary survives with
  // probability 0.1; out-of-range and missing rows are untouched
  std::vector<std::vector<double>> probs(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t vocab = ds.columns()[features[i]].vocab.size();
    const std::size_t len =
        std::max<std::size_t>(1, fraction_count(0.5, vocab));
    const std::size_t start = range_rng.index(vocab - len + 1);
    probs[i].resize(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      const double v = ds.at(r, features[i]);
      const bool in_range =
          !is_missing(v, ColumnKind::kCategorical) &&
          static_cast<std::size_t>(v) >= start &&
          static_cast<std::size_t>(v) < start + len;
      probs[i][r] = in_range ? 0.1 : 1.0;
    }
  }
  return subsample_by_feature_probs(ds, spec, features, probs);
}

ShiftedDataset apply_knock_out(const Dataset& ds, const ShiftSpec& spec) {
  std::vector<std::size_t> counts(ds.n_classes(), 0);
  for (int y : ds.labels()) ++counts[static_cast<std::size_t>(y)];
  const std::size_t majority = static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::vector<std::size_t> majority_rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (static_cast<std::size_t>(ds.labels()[r]) == majority) {
      majority_rows.push_back(r);
    }
  }
  const std::size_t n_remove =
      fraction_count(spec.sample_fraction, majority_rows.size());
  Rng rng(derive_seed(spec.seed, "subsample"));
  const auto picks =
      rng.sample_without_replacement(majority_rows.size(), n_remove);
  std::vector<bool> keep(ds.n_rows(), true);
  for (std::size_t i : picks) keep[majority_rows[i]] = false;
  return make_subsample(ds, spec, keep, {});
}

}  // namespace

bool is_perturbation(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kSwappedValues:
    case ShiftKind::kScaling:
    case ShiftKind::kOutliers:
    case ShiftKind::kMissingValues:
    case ShiftKind::kSmallGaussian:
    case ShiftKind::kMediumGaussian:
    case ShiftKind::kFlipSign:
    case ShiftKind::kConstantNumeric:
    case ShiftKind::kPlusMinusSomePercent:
      return true;
    default:
      return false;
  }
}

bool is_subsampling(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kJointSubsampling:
    case ShiftKind::kSubsamplingNumeric:
    case ShiftKind::kSubsamplingCategorical:
    case ShiftKind::kKnockOut:
      return true;
    default:
      return false;
  }
}

const std::string& shift_kind_name(ShiftKind kind) {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v(kKindNames.size());
    for (const auto& [k, name] : kKindNames) {
      v[static_cast<std::size_t>(k)] = name;
    }
    return v;
  }();
  return names[static_cast<std::size_t>(kind)];
}

ShiftKind parse_shift_kind(const std::string& name) {
  for (const auto& [kind, kind_name] : kKindNames) {
    if (name == kind_name) return kind;
  }
  throw ConfigError("unknown shift kind '" + name + "'");
}

const std::vector<ShiftKind>& all_shift_kinds() {
  static const std::vector<ShiftKind> kinds = [] {
    std::vector<ShiftKind> v;
    for (const auto& [kind, name] : kKindNames) v.push_back(kind);
    return v;
  }();
  return kinds;
}

void ShiftSpec::validate() const {
  if (sample_fraction < 0.0 || sample_fraction > 1.0) {
    throw ConfigError("sample fraction must lie in [0, 1]");
  }
  if (feature_fraction < 0.0 || feature_fraction > 1.0) {
    throw ConfigError("feature fraction must lie in [0, 1]");
  }
  if (kind == ShiftKind::kPlusMinusSomePercent &&
      (percent <= 0.0 || percent > 1.0)) {
    throw ConfigError("percent must lie in (0, 1]");
  }
}

std::size_t fraction_count(double frac, std::size_t total) {
  return static_cast<std::size_t>(
      std::floor(frac * static_cast<double>(total) + 0.5));
}

ShiftedDataset apply_shift(const Dataset& ds, const ShiftSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ShiftKind::kIdentity:
      return ShiftedDataset{ds, spec, {}, {}};
    case ShiftKind::kSwappedValues:
      return apply_swapped_values(ds, spec);
    case ShiftKind::kMissingValues:
      return apply_missing_values(ds, spec);
    case ShiftKind::kScaling:
    case ShiftKind::kOutliers:
    case ShiftKind::kSmallGaussian:
    case ShiftKind::kMediumGaussian:
    case ShiftKind::kFlipSign:
    case ShiftKind::kConstantNumeric:
    case ShiftKind::kPlusMinusSomePercent:
      return apply_numeric_perturbation(ds, spec);
    case ShiftKind::kJointSubsampling:
      return apply_joint_subsampling(ds, spec);
    case ShiftKind::kSubsamplingNumeric:
      return apply_subsampling_numeric(ds, spec);
    case ShiftKind::kSubsamplingCategorical:
      return apply_subsampling_categorical(ds, spec);
    case ShiftKind::kKnockOut:
      return apply_knock_out(ds, spec);
  }
  throw DriftError("unhandled shift kind");
}

ShiftSpec sample_spec(const std::vector<ShiftKind>& kind_pool,
                      std::pair<double, double> severity_range,
                      std::pair<double, double> feature_range, double percent,
                      std::uint64_t seed) {
  if (kind_pool.empty()) throw ConfigError("empty shift kind pool");
  for (const auto& range : {severity_range, feature_range}) {
    if (range.first < 0.0 || range.second > 1.0 ||
        range.first > range.second) {
      throw ConfigError("shift ranges must satisfy 0 <= lo <= hi <= 1");
    }
  }
  Rng rng(derive_seed(seed, "spec"));
  ShiftSpec spec;
  spec.kind = kind_pool[rng.index(kind_pool.size())];
  spec.sample_fraction = rng.uniform(severity_range.first,
                                     severity_range.second);
  spec.feature_fraction =
      rng.uniform(feature_range.first, feature_range.second);
  spec.percent = percent;
  spec.seed = derive_seed(seed, "apply");
  return spec;
}

}  // namespace drift
