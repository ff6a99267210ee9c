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

#include <optional>
#include <string>

#include "drift/harness.hpp"

#include "json.hpp"

namespace drift {

inline constexpr const char* kToolVersion = "0.1.0";

// One experiment: dataset + schema + split plan, protocol, predictor
// roster, output location and seed. Parsed strictly: unknown keys are
// rejected before any computation starts.
struct ExperimentConfig {
  std::string dataset_path;
  std::string label;
  Schema schema;
  std::optional<SplitPlan> split;
  Protocol protocol;
  Roster roster = default_roster();
  std::string output_dir = "out";
  bool save_models = true;
  std::uint64_t seed = 0;
};

ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Reads a config file; a manifest produced by a previous bench run is
// accepted too (its embedded resolved config is used), which is how a
// run is replayed exactly.
ExperimentConfig load_config_file(const std::string& path);

// FNV-1a over the canonical serialized config; hex string.
std::string config_hash(const nlohmann::ordered_json& j);

nlohmann::ordered_json make_manifest(const ExperimentConfig& config);

}  // namespace drift
