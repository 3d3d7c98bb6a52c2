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

#include "malpipe/trees.hpp"

#include <cmath>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"

namespace malpipe {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double eval_tree(const Tree& tree, const float* row) {
  int32_t i = 0;
  while (!tree[i].is_leaf())
    i = row[tree[i].feature] <= tree[i].threshold ? tree[i].left : tree[i].right;
  return tree[i].value;
}

void HyperParams::validate() const {
  if (n_trees < 0) throw ConfigError("n_trees must be >= 0");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be positive and finite");
  if (n_bins < 2 || n_bins > 65536) throw ConfigError("n_bins must be in [2, 65536]");
  if (!(feature_subsample_fraction > 0.0) || feature_subsample_fraction > 1.0)
    throw ConfigError("feature_subsample_fraction must be in (0, 1]");
  if (!(row_subsample_fraction > 0.0) || row_subsample_fraction > 1.0)
    throw ConfigError("row_subsample_fraction must be in (0, 1]");
  if (!(min_split_gain >= 0.0) || !std::isfinite(min_split_gain))
    throw ConfigError("min_split_gain must be >= 0");
}

std::string to_string(ForestKind kind) {
  switch (kind) {
    case ForestKind::gbdt_a: return "gbdt_a";
    case ForestKind::gbdt_b: return "gbdt_b";
    case ForestKind::random_forest: return "random_forest";
    case ForestKind::extra_trees: return "extra_trees";
  }
  throw ConfigError("unknown learner kind");
}

ForestKind forest_kind_from_string(const std::string& name) {
  if (name == "gbdt_a") return ForestKind::gbdt_a;
  if (name == "gbdt_b") return ForestKind::gbdt_b;
  if (name == "random_forest") return ForestKind::random_forest;
  if (name == "extra_trees") return ForestKind::extra_trees;
  throw ConfigError("unknown learner kind \"" + name + "\"");
}

double predict_row(const ForestModel& model, const float* row) {
  double sum = 0.0;
  for (const Tree& tree : model.trees) sum += eval_tree(tree, row);
  if (model.is_gbdt()) return sigmoid(model.base_score + model.learning_rate * sum);
  return model.trees.empty() ? 0.5 : sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_proba(const ForestModel& model, const Dataset& data) {
  if (data.cols() != model.n_features)
    throw ModelError("feature count mismatch: model expects " +
                     std::to_string(model.n_features) + ", data has " +
                     std::to_string(data.cols()));
  std::vector<double> out(data.rows());
  runtime::parallel_for(0, data.rows(), [&](size_t r) {
    out[r] = predict_row(model, data.row(r).data());
  });
  return out;
}

ForestModel fit_forest(const Dataset& train, ForestKind kind, const HyperParams& hp,
                       uint64_t seed) {
  switch (kind) {
    case ForestKind::gbdt_a:
    case ForestKind::gbdt_b: return fit_gbdt(train, hp, seed, kind);
    case ForestKind::random_forest: return fit_random_forest(train, hp, seed);
    case ForestKind::extra_trees: return fit_extra_trees(train, hp, seed);
  }
  throw ConfigError("unknown learner kind");
}

namespace detail {

void check_trainable(const Dataset& train) {
  if (train.rows() == 0) throw DataError("cannot fit on an empty dataset");
  for (float v : train.features)
    if (!std::isfinite(v)) throw DataError("training features must be finite");
  const size_t pos = train.count_label(1);
  if (pos == 0 || pos == train.rows())
    throw DataError("training data must contain both classes");
}

}  // namespace detail
}  // namespace malpipe
