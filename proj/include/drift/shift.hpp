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
#include <string>
#include <vector>

#include "drift/dataset.hpp"

namespace drift {

// Label-preserving perturbations, subpopulation subsampling kinds and
// the identity control.
enum class ShiftKind {
  kSwappedValues,
  kScaling,
  kOutliers,
  kMissingValues,
  kSmallGaussian,
  kMediumGaussian,
  kFlipSign,
  kConstantNumeric,
  kPlusMinusSomePercent,
  kJointSubsampling,
  kSubsamplingNumeric,
  kSubsamplingCategorical,
  kKnockOut,
  kIdentity,
};

// Cell-perturbing kinds select round-half-up(s*n) rows and an eligible
// feature subset; subsampling kinds drop rows instead (s and f are
// used or ignored per kind, see apply_shift).
bool is_perturbation(ShiftKind kind);
bool is_subsampling(ShiftKind kind);

const std::string& shift_kind_name(ShiftKind kind);
ShiftKind parse_shift_kind(const std::string& name);  // throws ConfigError
const std::vector<ShiftKind>& all_shift_kinds();

// One perturbation recipe: kind, sample fraction s, feature fraction f,
// percent p (PlusMinusSomePercent only) and the seed that makes
// apply_shift deterministic.
struct ShiftSpec {
  ShiftKind kind = ShiftKind::kIdentity;
  double sample_fraction = 1.0;
  double feature_fraction = 1.0;
  double percent = 0.1;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError on out-of-range fields
};

// Shift output with provenance: which rows / feature columns were
// touched. For perturbation kinds affected_rows/affected_features are
// the selected row block and the perturbed columns (both sorted); for
// subsampling kinds affected_rows lists the removed input rows and
// affected_features the columns that drove the subsampling. Identity
// leaves both empty.
struct ShiftedDataset {
  Dataset data;
  ShiftSpec spec;
  std::vector<std::size_t> affected_rows;
  std::vector<std::size_t> affected_features;
};

// Applies one shift. Rules shared by the perturbation kinds:
//   - affected rows: round-half-up(s*n) drawn without replacement;
//   - affected features: max(1, round-half-up(f*d_eligible)) drawn from
//     the kind's eligible columns when f > 0, none when f = 0;
//   - missing cells inside the affected block stay missing (except
//     MissingValues, whose whole point is to create them);
//   - labels are never modified.
// SwappedValues exchanges column pairs of the same kind; categorical
// columns pair only when their vocabularies are identical, and the
// affected set holds 2*max(1, floor(max(1, rhu(f*d_eligible))/2)) columns
// capped by the number of formable pairs.
// Subsampling kinds keep rows probabilistically (see the per-kind
// helpers in shift.cpp); output keeps input row order. Throws
// EligibilityError when no eligible column exists and DegenerateError
// when subsampling would leave fewer than two classes.
ShiftedDataset apply_shift(const Dataset& ds, const ShiftSpec& spec);

// Draws kind uniformly from the pool (with multiplicity), s from
// severity_range, f from feature_range. Deterministic under seed.
ShiftSpec sample_spec(const std::vector<ShiftKind>& kind_pool,
                      std::pair<double, double> severity_range,
                      std::pair<double, double> feature_range, double percent,
                      std::uint64_t seed);

// round-half-up(frac * total)
std::size_t fraction_count(double frac, std::size_t total);

}  // namespace drift
