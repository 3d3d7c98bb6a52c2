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

#include "malpipe/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"

namespace malpipe {

float split_threshold(float lo, float hi) {
  float t = static_cast<float>((static_cast<double>(lo) + static_cast<double>(hi)) * 0.5);
  if (!(t < hi)) t = std::nextafterf(hi, -std::numeric_limits<float>::infinity());
  return t;
}

BinMapper BinMapper::fit(const Dataset& data, int n_bins) {
  if (n_bins < 2 || n_bins > 65536) throw ConfigError("n_bins must be in [2, 65536]");
  const size_t n = data.rows();
  const size_t d = data.cols();
  if (n == 0) throw DataError("cannot fit bins on an empty dataset");

  BinMapper mapper;
  mapper.uppers_.resize(d);

  runtime::parallel_for(0, d, [&](size_t j) {
    std::vector<float> col(n);
    for (size_t r = 0; r < n; ++r) col[r] = data.at(r, j);
    std::sort(col.begin(), col.end());

    // Distinct values with multiplicities.
    std::vector<float> values;
    std::vector<size_t> prefix;  // rows in groups 0..g inclusive
    for (size_t r = 0; r < n; ++r) {
      if (values.empty() || col[r] != values.back()) {
        values.push_back(col[r]);
        prefix.push_back(r + 1);
      } else {
        prefix.back() = r + 1;
      }
    }

    const size_t u = values.size();
    std::vector<float>& uppers = mapper.uppers_[j];
    if (u <= static_cast<size_t>(n_bins)) {
      uppers.reserve(u > 0 ? u - 1 : 0);
      for (size_t g = 0; g + 1 < u; ++g)
        uppers.push_back(split_threshold(values[g], values[g + 1]));
      return;
    }

    // Equal-frequency cuts at k*n/n_bins, moved to the nearest following
    // group boundary so ties never straddle a bin.
    size_t g = 0;
    for (int k = 1; k < n_bins; ++k) {
      const double target = static_cast<double>(k) * static_cast<double>(n) / n_bins;
      while (g < u && static_cast<double>(prefix[g]) < target) ++g;
      if (g + 1 >= u) break;
      const float t = split_threshold(values[g], values[g + 1]);
      if (uppers.empty() || t != uppers.back()) uppers.push_back(t);
    }
  });
  return mapper;
}

uint16_t BinMapper::code(size_t feature, float value) const {
  const std::vector<float>& uppers = uppers_[feature];
  const auto it = std::lower_bound(uppers.begin(), uppers.end(), value);
  return static_cast<uint16_t>(it - uppers.begin());
}

BinnedMatrix bin_dataset(const BinMapper& mapper, const Dataset& data) {
  if (data.cols() != mapper.feature_count())
    throw ModelError("bin mapper feature count does not match the dataset");
  BinnedMatrix binned;
  binned.n_rows = data.rows();
  binned.n_features = data.cols();
  binned.codes.resize(binned.n_rows * binned.n_features);
  runtime::parallel_for(0, binned.n_features, [&](size_t j) {
    uint16_t* out = binned.codes.data() + j * binned.n_rows;
    for (size_t r = 0; r < binned.n_rows; ++r) out[r] = mapper.code(j, data.at(r, j));
  });
  return binned;
}

}  // namespace malpipe
