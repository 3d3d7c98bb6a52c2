// Copyright 2026 The Malpipe Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "malpipe/ensemble.hpp"
#include "malpipe/reducer.hpp"
#include "malpipe/scaler.hpp"

namespace malpipe {

// A trained pipeline persisted as a directory of JSON artifacts:
//   manifest.json    run metadata and telemetry (volatile, unchecksummed)
//   scalers.json     two-stage scaler parameters
//   reducer.json     column selection or PCA projection
//   model_1.json     instance trained on partition A
//   model_2.json     instance trained on partition B
//   vote.json        frozen weights, grid report, tuner trace
//   checksums.sha256 digests of the five payload files above
// Payload serialization is deterministic (sorted keys, round-trip float
// text), so identical training runs produce identical payload bytes.
struct ModelBundle {
  static constexpr int kFormatVersion = 1;

  ScalerChain scalers;
  Reducer reducer;
  VotingEnsemble ensemble;
  nlohmann::json tuner_trace = nlohmann::json::array();  // carried into vote.json
};

inline constexpr const char* kBundlePayloadFiles[] = {
    "scalers.json", "reducer.json", "model_1.json", "model_2.json", "vote.json"};

// manifest carries run metadata; save adds format_version to it. Holds a
// lock file for the duration of the write; a live lock from another writer
// is an error.
void save_bundle(const std::filesystem::path& dir, const ModelBundle& bundle,
                 const nlohmann::json& manifest);

// Verifies format_version and payload checksums before deserializing.
ModelBundle load_bundle(const std::filesystem::path& dir);

nlohmann::json load_bundle_manifest(const std::filesystem::path& dir);

// Hex SHA-256 digests.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Serialization pieces, exposed for tests and the report command.
nlohmann::json scalers_to_json(const ScalerChain& chain);
ScalerChain scalers_from_json(const nlohmann::json& j);
nlohmann::json reducer_to_json(const Reducer& reducer);
Reducer reducer_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ForestModel& model);
ForestModel model_from_json(const nlohmann::json& j);

}  // namespace malpipe
