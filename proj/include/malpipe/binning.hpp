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

// Equal-frequency histogram bins, fitted per feature on one training
// matrix. When a feature has at most n_bins distinct values every distinct
// value gets its own bin, so histogram split search degrades gracefully to
// an exact scan. Bin b spans (uppers[b-1], uppers[b]]; the stored upper
// boundary between adjacent bins is an f32 threshold t with
// max(bin b) <= t < min(bin b+1), usable directly as a tree split
// ("go left iff x <= t").
class BinMapper {
public:
  // n_bins in [2, 65536]; data must be nonempty with finite features.
  static BinMapper fit(const Dataset& data, int n_bins);

  size_t feature_count() const { return uppers_.size(); }
  int bin_count(size_t feature) const {
    return static_cast<int>(uppers_[feature].size()) + 1;
  }
  float upper(size_t feature, int bin) const { return uppers_[feature][bin]; }

  uint16_t code(size_t feature, float value) const;

private:
  // Per feature, ascending, size bin_count-1. A constant feature has one
  // bin and no boundaries.
  std::vector<std::vector<float>> uppers_;
};

// f32 threshold separating values <= lo from values >= hi (lo < hi):
// lo <= t < hi, midpoint rounded where possible.
float split_threshold(float lo, float hi);

// Column-major bin codes so per-feature histogram loops stay contiguous.
struct BinnedMatrix {
  size_t n_rows = 0;
  size_t n_features = 0;
  std::vector<uint16_t> codes;  // codes[f * n_rows + r]

  uint16_t at(size_t r, size_t f) const { return codes[f * n_rows + r]; }
  const uint16_t* column(size_t f) const { return codes.data() + f * n_rows; }
};

BinnedMatrix bin_dataset(const BinMapper& mapper, const Dataset& data);

}  // namespace malpipe
