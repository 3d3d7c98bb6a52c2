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
#include <variant>
#include <vector>

#include "malpipe/dataset.hpp"

namespace malpipe {

// Keeps the k columns with the highest total split gain in a fixed-recipe
// boosted ranking model; ties go to the lower column index.
struct SelectionReducer {
  size_t k = 0;
  std::vector<uint32_t> selected_indices;  // ascending
  std::vector<double> importances;         // length d, >= 0
};

// Orthonormal projection onto the top-k principal axes of the training
// matrix (sample covariance, divisor n-1). Signs are fixed by making each
// row's largest-magnitude entry positive.
struct PcaReducer {
  size_t k = 0;
  std::vector<double> mean;                // length d
  std::vector<double> components;          // k x d, row-major
  std::vector<double> explained_variance;  // length k, non-increasing

  size_t input_dim() const { return mean.size(); }
};

using Reducer = std::variant<SelectionReducer, PcaReducer>;

SelectionReducer fit_selection(const Dataset& train, size_t k, uint64_t seed);

PcaReducer fit_pca(const Dataset& train, size_t k);

// Selection gathers columns; PCA projects centered rows. Labels and row
// ids pass through.
Dataset apply_reducer(const Reducer& reducer, const Dataset& data);

size_t reducer_output_dim(const Reducer& reducer);

}  // namespace malpipe
