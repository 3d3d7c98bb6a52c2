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

#include "malpipe/reducer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"
#include "malpipe/trees.hpp"

namespace malpipe {

namespace {

// Recipe for the ranking model; fixed so selection is reproducible and
// insensitive to the caller's tuner choices.
HyperParams ranking_hyperparams() {
  HyperParams hp;
  hp.n_trees = 100;
  hp.learning_rate = 0.1;
  hp.max_depth = 6;
  hp.n_bins = 256;
  hp.feature_subsample_fraction = 1.0;
  hp.row_subsample_fraction = 1.0;
  return hp;
}

}  // namespace

SelectionReducer fit_selection(const Dataset& train, size_t k, uint64_t seed) {
  const size_t d = train.cols();
  if (k < 1 || k > d) throw ConfigError("selection k must be in [1, feature_count]");
  detail::check_trainable(train);

  const ForestModel ranker = fit_gbdt(train, ranking_hyperparams(), seed, ForestKind::gbdt_a);

  std::vector<uint32_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  const std::vector<double>& imp = ranker.feature_importance;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (imp[a] != imp[b]) return imp[a] > imp[b];
    return a < b;
  });

  SelectionReducer reducer;
  reducer.k = k;
  reducer.importances = imp;
  reducer.selected_indices.assign(order.begin(), order.begin() + static_cast<ptrdiff_t>(k));
  std::sort(reducer.selected_indices.begin(), reducer.selected_indices.end());
  return reducer;
}

PcaReducer fit_pca(const Dataset& train, size_t k) {
  const size_t n = train.rows();
  const size_t d = train.cols();
  if (n < 2) throw DataError("pca needs at least two rows");
  if (k < 1 || k > d) throw ConfigError("pca k must be in [1, feature_count]");
  if (k > n - 1)
    throw DataError("pca k exceeds the rank budget min(rows-1, feature_count)");

  Eigen::MatrixXd centered(n, d);
  PcaReducer reducer;
  reducer.k = k;
  reducer.mean.resize(d);
  for (size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (size_t r = 0; r < n; ++r) sum += static_cast<double>(train.at(r, j));
    reducer.mean[j] = sum / static_cast<double>(n);
  }
  for (size_t r = 0; r < n; ++r)
    for (size_t j = 0; j < d; ++j)
      centered(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          static_cast<double>(train.at(r, j)) - reducer.mean[j];

  double total_variance = 0.0;
  for (size_t j = 0; j < d; ++j)
    total_variance += centered.col(static_cast<Eigen::Index>(j)).squaredNorm();
  if (total_variance == 0.0) throw DataError("pca requires nonzero variance");

  Eigen::MatrixXd axes;      // d x k, columns = principal axes
  Eigen::VectorXd variance;  // k, descending

  if (d <= 512) {
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ModelError("pca eigensolver failed");
    // Eigen reports eigenvalues ascending.
    axes.resize(d, k);
    variance.resize(static_cast<Eigen::Index>(k));
    for (size_t i = 0; i < k; ++i) {
      const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - i);
      axes.col(static_cast<Eigen::Index>(i)) = solver.eigenvectors().col(src);
      variance(static_cast<Eigen::Index>(i)) = solver.eigenvalues()(src);
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw ModelError("pca svd failed");
    axes = svd.matrixV().leftCols(static_cast<Eigen::Index>(k));
    variance.resize(static_cast<Eigen::Index>(k));
    for (size_t i = 0; i < k; ++i) {
      const double s = svd.singularValues()(static_cast<Eigen::Index>(i));
      variance(static_cast<Eigen::Index>(i)) = s * s / static_cast<double>(n - 1);
    }
  }

  reducer.components.resize(k * d);
  reducer.explained_variance.resize(k);
  for (size_t i = 0; i < k; ++i) {
    // Sign convention: largest-magnitude entry positive, ties to the
    // lower index.
    size_t pivot = 0;
    for (size_t j = 1; j < d; ++j)
      if (std::abs(axes(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) >
          std::abs(axes(static_cast<Eigen::Index>(pivot), static_cast<Eigen::Index>(i))))
        pivot = j;
    const double flip =
        axes(static_cast<Eigen::Index>(pivot), static_cast<Eigen::Index>(i)) < 0.0 ? -1.0
                                                                                    : 1.0;
    for (size_t j = 0; j < d; ++j)
      reducer.components[i * d + j] =
          flip * axes(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    const double ev = variance(static_cast<Eigen::Index>(i));
    reducer.explained_variance[i] = ev < 0.0 && ev > -1e-8 ? 0.0 : ev;
  }
  return reducer;
}

namespace {

Dataset apply_selection(const SelectionReducer& reducer, const Dataset& data) {
  for (uint32_t idx : reducer.selected_indices)
    if (idx >= data.cols())
      throw DataError("selection index " + std::to_string(idx) +
                      " out of range for " + std::to_string(data.cols()) + " features");
  Dataset out;
  out.n_cols = reducer.selected_indices.size();
  out.features.resize(data.rows() * out.n_cols);
  out.labels = data.labels;
  out.row_ids = data.row_ids;
  runtime::parallel_for(0, data.rows(), [&](size_t r) {
    float* dst = out.features.data() + r * out.n_cols;
    for (size_t i = 0; i < out.n_cols; ++i) dst[i] = data.at(r, reducer.selected_indices[i]);
  });
  return out;
}

Dataset apply_pca(const PcaReducer& reducer, const Dataset& data) {
  const size_t d = reducer.input_dim();
  if (data.cols() != d)
    throw DataError("pca expects " + std::to_string(d) + " features, data has " +
                    std::to_string(data.cols()));
  Dataset out;
  out.n_cols = reducer.k;
  out.features.resize(data.rows() * reducer.k);
  out.labels = data.labels;
  out.row_ids = data.row_ids;
  runtime::parallel_for(0, data.rows(), [&](size_t r) {
    float* dst = out.features.data() + r * reducer.k;
    for (size_t i = 0; i < reducer.k; ++i) {
      const double* axis = reducer.components.data() + i * d;
      double dot = 0.0;
      for (size_t j = 0; j < d; ++j)
        dot += axis[j] * (static_cast<double>(data.at(r, j)) - reducer.mean[j]);
      dst[i] = static_cast<float>(dot);
    }
  });
  return out;
}

}  // namespace

Dataset apply_reducer(const Reducer& reducer, const Dataset& data) {
  if (const auto* sel = std::get_if<SelectionReducer>(&reducer))
    return apply_selection(*sel, data);
  return apply_pca(std::get<PcaReducer>(reducer), data);
}

size_t reducer_output_dim(const Reducer& reducer) {
  if (const auto* sel = std::get_if<SelectionReducer>(&reducer))
    return sel->selected_indices.size();
  return std::get<PcaReducer>(reducer).k;
}

}  // namespace malpipe
