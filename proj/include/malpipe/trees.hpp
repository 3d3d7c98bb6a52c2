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
#include <string>
#include <vector>

#include "malpipe/dataset.hpp"

namespace malpipe {

// feature < 0 marks a leaf. Internal nodes route "go left iff
// x[feature] <= threshold".
struct TreeNode {
  int32_t feature = -1;
  float threshold = 0.0f;
  double value = 0.0;  // leaf output: raw score (GBDT) or class probability
  int32_t left = -1;
  int32_t right = -1;

  bool is_leaf() const { return feature < 0; }
};

// Node 0 is the root; nodes stored in pre-order.
using Tree = std::vector<TreeNode>;

double eval_tree(const Tree& tree, const float* row);

struct HyperParams {
  int n_trees = 200;
  int max_depth = 6;    // level-wise GBDT and bagging forests
  int max_leaves = 31;  // leaf-wise GBDT
  int min_samples_leaf = 20;
  double learning_rate = 0.1;
  int n_bins = 256;
  double feature_subsample_fraction = 1.0;  // per GBDT tree
  double row_subsample_fraction = 1.0;      // per tree; bagging samples with replacement
  double min_split_gain = 0.0;
  bool bootstrap = true;  // random forest only; off = every tree sees all rows

  void validate() const;
};

enum class ForestKind { gbdt_a, gbdt_b, random_forest, extra_trees };

std::string to_string(ForestKind kind);
ForestKind forest_kind_from_string(const std::string& name);

struct ForestModel {
  ForestKind kind = ForestKind::gbdt_a;
  std::vector<Tree> trees;
  double base_score = 0.0;    // GBDT log-odds prior; 0 for bagging forests
  double learning_rate = 1.0; // applied outside stored leaf values; 1 for bagging
  HyperParams hp;
  uint64_t seed = 0;
  size_t n_features = 0;
  std::vector<double> feature_importance;  // total split gain per feature

  bool is_gbdt() const { return kind == ForestKind::gbdt_a || kind == ForestKind::gbdt_b; }
};

// Malicious-class probability per row. GBDT: logistic(base + lr * sum of
// tree outputs); bagging: mean of per-tree leaf probabilities.
double predict_row(const ForestModel& model, const float* row);
std::vector<double> predict_proba(const ForestModel& model, const Dataset& data);

// Level-wise (gbdt_a, bounded by max_depth) or leaf-wise (gbdt_b, bounded
// by max_leaves) boosting with logistic loss. n_trees 0 yields the prior.
ForestModel fit_gbdt(const Dataset& train, const HyperParams& hp, uint64_t seed,
                     ForestKind preset);

// Bagged Gini trees on bootstrap samples, sqrt(d) features per split,
// leaves hold the positive-class fraction.
ForestModel fit_random_forest(const Dataset& train, const HyperParams& hp, uint64_t seed);

// Like the random forest but with no bootstrap and one uniformly drawn
// threshold per candidate feature instead of an exhaustive scan.
ForestModel fit_extra_trees(const Dataset& train, const HyperParams& hp, uint64_t seed);

ForestModel fit_forest(const Dataset& train, ForestKind kind, const HyperParams& hp,
                       uint64_t seed);

double sigmoid(double x);

namespace detail {
// Shared fit preconditions: nonempty, finite features, both classes present.
void check_trainable(const Dataset& train);
}  // namespace detail

}  // namespace malpipe
