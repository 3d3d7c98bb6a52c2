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

#include <vector>

#include "malpipe/dataset.hpp"

namespace malpipe {

struct RobustScalerParams {
  std::vector<float> medians;
  std::vector<float> iqrs;  // Q3 - Q1, >= 0
};

struct MinMaxScalerParams {
  std::vector<float> mins;   // of the robust-scaled training matrix
  std::vector<float> maxes;
};

// Two-stage normalization fitted on the training split only:
// stage 1 centers by median and divides by IQR (IQR 0 -> divide by 1),
// stage 2 maps the stage-1 training range onto [0,1] (degenerate -> 0).
// Arithmetic runs in f64; stored params are f32, with the min/max rounded
// outward so training outputs land in [0,1] exactly.
struct ScalerChain {
  RobustScalerParams robust;
  MinMaxScalerParams minmax;
  size_t feature_count = 0;

  double transform_value(size_t j, double x) const {
    const double iqr = iqrs_or_one(j);
    const double s1 = (x - static_cast<double>(robust.medians[j])) / iqr;
    const double lo = static_cast<double>(minmax.mins[j]);
    const double hi = static_cast<double>(minmax.maxes[j]);
    if (hi <= lo) return 0.0;  // constant feature after stage 1
    return (s1 - lo) / (hi - lo);
  }

private:
  double iqrs_or_one(size_t j) const {
    const double iqr = static_cast<double>(robust.iqrs[j]);
    return iqr > 0.0 ? iqr : 1.0;
  }
};

// Linear-interpolation quantile at position p*(n-1) over a sorted copy.
double quantile(std::vector<double> values, double p);

ScalerChain fit_scaler_chain(const Dataset& train);

// Out-of-range inputs are not clipped; labels and row ids pass through.
Dataset transform(const ScalerChain& chain, const Dataset& data);

}  // namespace malpipe
