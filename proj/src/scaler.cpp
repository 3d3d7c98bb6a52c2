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

#include "malpipe/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "malpipe/runtime.hpp"

namespace malpipe {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of empty vector");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

// f32 cast that never crosses the f64 bound from the given direction.
float round_down(double v) {
  float f = static_cast<float>(v);
  if (static_cast<double>(f) > v) f = std::nextafterf(f, -std::numeric_limits<float>::infinity());
  return f;
}

float round_up(double v) {
  float f = static_cast<float>(v);
  if (static_cast<double>(f) < v) f = std::nextafterf(f, std::numeric_limits<float>::infinity());
  return f;
}

}  // namespace

ScalerChain fit_scaler_chain(const Dataset& train) {
  const size_t n = train.rows();
  const size_t d = train.n_cols;
  if (n == 0) throw DataError("cannot fit scaler chain on an empty dataset");

  ScalerChain chain;
  chain.feature_count = d;
  chain.robust.medians.resize(d);
  chain.robust.iqrs.resize(d);
  chain.minmax.mins.resize(d);
  chain.minmax.maxes.resize(d);

  runtime::parallel_for(0, d, [&](size_t j) {
    std::vector<double> column(n);
    for (size_t r = 0; r < n; ++r) column[r] = static_cast<double>(train.at(r, j));
    std::sort(column.begin(), column.end());

    auto at = [&](double p) {
      const double pos = p * static_cast<double>(n - 1);
      const size_t lo = static_cast<size_t>(pos);
      const size_t hi = std::min(lo + 1, n - 1);
      const double frac = pos - static_cast<double>(lo);
      return column[lo] + frac * (column[hi] - column[lo]);
    };
    const double median = at(0.5);
    const double iqr = at(0.75) - at(0.25);
    chain.robust.medians[j] = static_cast<float>(median);
    chain.robust.iqrs[j] = static_cast<float>(std::max(iqr, 0.0));

    // Min/max of stage 1 as actually computed from the stored f32 params,
    // rounded outward so every training output stays inside [0,1].
    const double med_stored = static_cast<double>(chain.robust.medians[j]);
    const double iqr_stored = static_cast<double>(chain.robust.iqrs[j]);
    const double div = iqr_stored > 0.0 ? iqr_stored : 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < n; ++r) {
      const double s1 = (static_cast<double>(train.at(r, j)) - med_stored) / div;
      lo = std::min(lo, s1);
      hi = std::max(hi, s1);
    }
    if (lo == hi) {
      chain.minmax.mins[j] = static_cast<float>(lo);
      chain.minmax.maxes[j] = static_cast<float>(hi);
    } else {
      chain.minmax.mins[j] = round_down(lo);
      chain.minmax.maxes[j] = round_up(hi);
    }
  });
  return chain;
}

Dataset transform(const ScalerChain& chain, const Dataset& data) {
  if (data.n_cols != chain.feature_count)
    throw DataError("feature count mismatch: data has " + std::to_string(data.n_cols) +
                    " columns, scaler chain expects " + std::to_string(chain.feature_count));
  Dataset out;
  out.n_cols = data.n_cols;
  out.labels = data.labels;
  out.row_ids = data.row_ids;
  out.features.resize(data.features.size());
  const size_t n = data.rows();
  runtime::parallel_for(0, n, [&](size_t r) {
    for (size_t j = 0; j < data.n_cols; ++j) {
      out.features[r * data.n_cols + j] = static_cast<float>(
          chain.transform_value(j, static_cast<double>(data.at(r, j))));
    }
  });
  return out;
}

}  // namespace malpipe
