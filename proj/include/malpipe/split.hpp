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

#include "malpipe/binning.hpp"
#include "malpipe/trees.hpp"

namespace malpipe {

struct SplitCandidate {
  int32_t feature = -1;
  int32_t bin = -1;  // split sends codes <= bin to the left
  float threshold = 0.0f;
  double gain = 0.0;

  bool valid() const { return feature >= 0; }
};

// Histogram split search with the second-order logistic-loss gain
// gain = 1/2 [G_L^2/(H_L+1) + G_R^2/(H_R+1) - (G_L+G_R)^2/(H_L+H_R+1)].
// sum_g/sum_h are the node totals accumulated in row order. Candidates are
// scanned feature-ascending then bin-ascending; a candidate wins only on
// strictly greater gain, and must satisfy gain >= min_split_gain, gain > 0
// and min_samples_leaf on both sides. Deterministic for any thread count.
SplitCandidate find_best_split_grad(const BinnedMatrix& binned, const BinMapper& mapper,
                                    const std::vector<uint32_t>& rows,
                                    const std::vector<double>& grad,
                                    const std::vector<double>& hess,
                                    const std::vector<uint32_t>& features,
                                    double sum_g, double sum_h, const HyperParams& hp);

// Exact (sort-based) Gini split over raw feature values, used by the
// random forest. gain = gini_sum(node) - gini_sum(L) - gini_sum(R) with
// gini_sum(c, pos) = c * (1 - p0^2 - p1^2); acceptance rules as above.
SplitCandidate find_best_split_gini(const Dataset& data, const std::vector<uint32_t>& rows,
                                    const std::vector<uint32_t>& features,
                                    const HyperParams& hp);

double gini_sum(size_t count, size_t positives);

}  // namespace malpipe
