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
#include <vector>

#include <json.hpp>

#include "malpipe/bundle.hpp"
#include "malpipe/dataset.hpp"
#include "malpipe/ensemble.hpp"
#include "malpipe/io.hpp"
#include "malpipe/metrics.hpp"

namespace malpipe {

struct ReductionConfig {
  enum class Method { selection, pca };
  Method method = Method::selection;
  size_t k = 0;
};

// Training-run configuration, read from a JSON file with an explicit
// schema_version. The seed is mandatory; every randomized stage derives
// its own stream from it.
struct PipelineConfig {
  std::string input_path;
  io::Format input_format = io::Format::csv;
  double train_fraction = 0.7;
  double validation_fraction = 0.15;
  double test_fraction = 0.15;
  uint64_t seed = 0;
  ReductionConfig reduction;
  ForestKind learner = ForestKind::gbdt_b;
  HyperParams hp;
  bool tuner_enabled = false;
  int tuner_trials = 20;
  std::string output_dir;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::string& path);

  nlohmann::json to_json() const;  // normalized echo, part of the manifest
};

struct StageRecord {
  std::string name;
  double wall_ms = 0.0;
  size_t rows = 0;
  size_t cols = 0;
};

struct TrainResult {
  MetricsReport validation;
  MetricsReport test;
  CleanReport clean_report;
  std::vector<StageRecord> stages;
  std::filesystem::path bundle_dir;
  double w1 = 0.0;
  double w2 = 0.0;
};

// load -> clean -> split -> fit scalers -> transform -> fit reducer ->
// reduce -> partition -> (tune) -> train both instances -> weight search
// -> evaluate -> persist. A stage failure removes the partial bundle and
// rethrows with the stage name prefixed.
TrainResult run_train(const PipelineConfig& cfg);

// Scalers -> reducer -> frozen-weight vote on a raw labeled dataset.
MetricsReport evaluate_bundle(const ModelBundle& bundle, const Dataset& raw);

// Same path without metrics; labels in `raw` are ignored.
std::pair<std::vector<double>, std::vector<uint8_t>> predict_with_bundle(
    const ModelBundle& bundle, const Dataset& raw);

nlohmann::json metrics_to_json(const MetricsReport& report);

}  // namespace malpipe
