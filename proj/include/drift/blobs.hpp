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

#include "drift/dataset.hpp"

namespace drift {

// Two-class Gaussian-blob table: six numeric features (three strong,
// three weak), one informative categorical feature and a "segment"
// categorical column usable as a natural-shift split variable (segments
// b and c carry a mild mean offset). Deterministic under seed.
Dataset make_synthetic_blobs(std::size_t n_rows, std::uint64_t seed);

}  // namespace drift
