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

#include <stdexcept>
#include <string>

namespace drift {

// Error taxonomy. Every failure surfaced by the library derives from
// DriftError so the CLI can map it to an exit code in one place.
class DriftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad CSV row, unbalanced quotes, ...).
class ParseError : public DriftError {
 public:
  using DriftError::DriftError;
};

// Input does not match the declared schema (unknown column, kind
// mismatch, missing label, ...).
class SchemaError : public DriftError {
 public:
  using DriftError::DriftError;
};

// A count constraint is violated (k > n, not enough rows, empty input).
class SizeError : public DriftError {
 public:
  using DriftError::DriftError;
};

// Invalid configuration value (bad range, empty pool, unknown key).
class ConfigError : public DriftError {
 public:
  using DriftError::DriftError;
};

// The requested operation has no eligible columns on this dataset.
class EligibilityError : public DriftError {
 public:
  using DriftError::DriftError;
};

// A split variable value selects no rows, or a split has no targets.
class EmptyDomainError : public DriftError {
 public:
  using DriftError::DriftError;
};

// The produced output is unusable (subsampling left fewer than two
// classes, training data holds a single class, ...).
class DegenerateError : public DriftError {
 public:
  using DriftError::DriftError;
};

}  // namespace drift
