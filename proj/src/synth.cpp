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

#include "malpipe/synth.hpp"

#include <cmath>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"

namespace malpipe {

namespace {
constexpr uint64_t kRuleStream = 1;
constexpr uint64_t kAttemptStreamBase = 1000;
constexpr int kMaxAttempts = 100;
}  // namespace

void SynthSpec::validate() const {
  if (rows < 1) throw ConfigError("synthetic rows must be >= 1");
  if (dims < 1) throw ConfigError("synthetic dims must be >= 1");
  if (informative > dims) throw ConfigError("informative dims cannot exceed dims");
  if (!(noise >= 0.0) || noise > 1.0) throw ConfigError("noise must be in [0, 1]");
}

SynthGroundTruth synth_ground_truth(const SynthSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, kRuleStream));
  SynthGroundTruth truth;
  truth.informative_indices = rng.sample_without_replacement(spec.dims, spec.informative);
  truth.coefficients.reserve(spec.informative);
  for (size_t i = 0; i < spec.informative; ++i) {
    const double sign = rng.below(2) == 0 ? 1.0 : -1.0;
    truth.coefficients.push_back(sign * rng.uniform(0.5, 1.5));
  }
  return truth;
}

Dataset make_synthetic(const SynthSpec& spec) {
  spec.validate();
  const SynthGroundTruth truth = synth_ground_truth(spec);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed(spec.seed, kAttemptStreamBase + static_cast<uint64_t>(attempt)));
    Dataset data;
    data.n_cols = spec.dims;
    data.features.resize(spec.rows * spec.dims);
    data.labels.resize(spec.rows);
    data.row_ids.resize(spec.rows);

    size_t positives = 0;
    for (size_t r = 0; r < spec.rows; ++r) {
      float* row = data.features.data() + r * spec.dims;
      for (size_t j = 0; j < spec.dims; ++j) row[j] = static_cast<float>(rng.normal());
      uint8_t label;
      if (spec.informative == 0) {
        label = static_cast<uint8_t>(rng.below(2));
      } else {
        double score = 0.0;
        for (size_t i = 0; i < spec.informative; ++i)
          score += truth.coefficients[i] *
                   static_cast<double>(row[truth.informative_indices[i]]);
        label = score > 0.0 ? 1 : 0;
        if (spec.noise > 0.0 && rng.uniform() < spec.noise) label = 1 - label;
      }
      data.labels[r] = label;
      data.row_ids[r] = r;
      positives += label;
    }

    const double fraction = static_cast<double>(positives) / static_cast<double>(spec.rows);
    if (fraction >= 0.4 && fraction <= 0.6) return data;
  }
  throw DataError("synthetic generator could not balance labels; adjust the spec");
}

}  // namespace malpipe
