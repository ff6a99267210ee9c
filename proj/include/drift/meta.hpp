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

#include <string>
#include <vector>

#include "drift/shift.hpp"

namespace drift {

// The six scenario families of the evaluation protocol.
enum class ScenarioKind {
  kTrain,
  kUnseenSeverity,
  kUnseenShift,
  kUnseenSubpopShift,
  kNatural,
  kNoShift,
};

const std::string& scenario_kind_name(ScenarioKind kind);
const std::vector<ScenarioKind>& all_scenario_kinds();

// One meta-example: a shifted dataset together with the primary
// model's measured accuracy on it. The labels inside `shifted` are
// ground truth held by the harness; predictors only ever receive
// shifted.data.features().
struct MetaEntry {
  ShiftedDataset shifted;
  double true_accuracy = 0.0;
  std::size_t n = 0;
  std::string scenario_id;
};

struct MetaSet {
  ScenarioKind kind = ScenarioKind::kTrain;
  std::vector<MetaEntry> entries;
};

}  // namespace drift
