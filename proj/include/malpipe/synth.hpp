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

#include <cstdint>
#include <vector>

#include "malpipe/dataset.hpp"

namespace malpipe {

// Labeled Gaussian data with a sparse linear ground truth:
//   features x ~ N(0, 1) iid,
//   label    y = 1 iff sum_i c_i * x[j_i] > 0, then flipped with
//            probability `noise`,
// where the informative indices j_i and signed coefficients c_i
// (|c_i| uniform in [0.5, 1.5]) derive from the seed. informative == 0
// makes labels independent fair coin flips. Generation is rejected and
// reseeded (derived from the attempt number) until the positive fraction
// lands in [0.4, 0.6].
struct SynthSpec {
  size_t rows = 0;
  size_t dims = 0;
  size_t informative = 0;
  double noise = 0.0;  // label flip probability, [0, 1]
  uint64_t seed = 0;

  void validate() const;
};

struct SynthGroundTruth {
  std::vector<size_t> informative_indices;  // ascending
  std::vector<double> coefficients;         // aligned with indices
};

Dataset make_synthetic(const SynthSpec& spec);

// The rule behind a spec's labels, so tests can recompute ground truth.
SynthGroundTruth synth_ground_truth(const SynthSpec& spec);

}  // namespace malpipe
