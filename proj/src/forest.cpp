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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"
#include "malpipe/split.hpp"

namespace malpipe {

double gini_sum(size_t count, size_t positives) {
  if (count == 0) return 0.0;
  const double p1 = static_cast<double>(positives) / static_cast<double>(count);
  const double p0 = 1.0 - p1;
  return static_cast<double>(count) * (1.0 - p0 * p0 - p1 * p1);
}

namespace {

bool accept_gain(double gain, const SplitCandidate& best, const HyperParams& hp) {
  return gain > 0.0 && gain >= hp.min_split_gain && (!best.valid() || gain > best.gain);
}

}  // namespace

SplitCandidate find_best_split_gini(const Dataset& data, const std::vector<uint32_t>& rows,
                                    const std::vector<uint32_t>& features,
                                    const HyperParams& hp) {
  const size_t n = rows.size();
  const size_t msl = static_cast<size_t>(hp.min_samples_leaf);
  size_t total_pos = 0;
  for (uint32_t r : rows) total_pos += data.labels[r];
  const double parent = gini_sum(n, total_pos);

  SplitCandidate best;
  std::vector<std::pair<float, uint8_t>> column(n);
  for (uint32_t f : features) {
    for (size_t i = 0; i < n; ++i)
      column[i] = {data.at(rows[i], f), data.labels[rows[i]]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    size_t left_count = 0, left_pos = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
      left_count += 1;
      left_pos += column[i].second;
      if (column[i].first == column[i + 1].first) continue;
      if (left_count < msl || n - left_count < msl) continue;
      const double gain = parent - gini_sum(left_count, left_pos) -
                          gini_sum(n - left_count, total_pos - left_pos);
      if (accept_gain(gain, best, hp)) {
        best.feature = static_cast<int32_t>(f);
        best.threshold = split_threshold(column[i].first, column[i + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

namespace {

// One uniformly drawn threshold per non-constant candidate feature; best of
// those by Gini gain. Draw order follows the ascending feature list so the
// generator stream is schedule-independent.
SplitCandidate random_threshold_split(const Dataset& data, const std::vector<uint32_t>& rows,
                                      const std::vector<uint32_t>& features,
                                      const HyperParams& hp, Rng& rng) {
  const size_t n = rows.size();
  const size_t msl = static_cast<size_t>(hp.min_samples_leaf);
  size_t total_pos = 0;
  for (uint32_t r : rows) total_pos += data.labels[r];
  const double parent = gini_sum(n, total_pos);

  SplitCandidate best;
  for (uint32_t f : features) {
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (uint32_t r : rows) {
      const float v = data.at(r, f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) continue;  // constant within the node

    float t = static_cast<float>(static_cast<double>(lo) +
                                 rng.uniform() * (static_cast<double>(hi) -
                                                  static_cast<double>(lo)));
    if (!(t < hi)) t = std::nextafterf(hi, -std::numeric_limits<float>::infinity());

    size_t left_count = 0, left_pos = 0;
    for (uint32_t r : rows) {
      if (data.at(r, f) <= t) {
        left_count += 1;
        left_pos += data.labels[r];
      }
    }
    if (left_count < msl || n - left_count < msl) continue;
    const double gain = parent - gini_sum(left_count, left_pos) -
                        gini_sum(n - left_count, total_pos - left_pos);
    if (accept_gain(gain, best, hp)) {
      best.feature = static_cast<int32_t>(f);
      best.threshold = t;
      best.gain = gain;
    }
  }
  return best;
}

struct BagContext {
  const Dataset& data;
  const HyperParams& hp;
  bool randomized;  // extra trees draw thresholds instead of scanning
  size_t n_candidate_features;
  Tree& tree;
  std::vector<double>& importance;
  Rng& rng;
};

// Depth-first, left before right, so nodes land in pre-order directly.
int32_t grow_gini_node(BagContext& ctx, std::vector<uint32_t>&& rows, int depth) {
  const int32_t id = static_cast<int32_t>(ctx.tree.size());
  ctx.tree.emplace_back();

  const size_t n = rows.size();
  size_t pos = 0;
  for (uint32_t r : rows) pos += ctx.data.labels[r];

  SplitCandidate split;
  if (depth < ctx.hp.max_depth && pos != 0 && pos != n &&
      n >= 2 * static_cast<size_t>(ctx.hp.min_samples_leaf)) {
    std::vector<uint32_t> features;
    features.reserve(ctx.n_candidate_features);
    for (size_t f : ctx.rng.sample_without_replacement(ctx.data.cols(),
                                                       ctx.n_candidate_features))
      features.push_back(static_cast<uint32_t>(f));
    split = ctx.randomized
                ? random_threshold_split(ctx.data, rows, features, ctx.hp, ctx.rng)
                : find_best_split_gini(ctx.data, rows, features, ctx.hp);
  }

  if (!split.valid()) {
    ctx.tree[id].value = static_cast<double>(pos) / static_cast<double>(n);
    return id;
  }

  ctx.importance[split.feature] += split.gain;
  std::vector<uint32_t> left, right;
  for (uint32_t r : rows) {
    (ctx.data.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
  }
  rows.clear();

  ctx.tree[id].feature = split.feature;
  ctx.tree[id].threshold = split.threshold;
  const int32_t l = grow_gini_node(ctx, std::move(left), depth + 1);
  const int32_t r = grow_gini_node(ctx, std::move(right), depth + 1);
  ctx.tree[id].left = l;
  ctx.tree[id].right = r;
  return id;
}

ForestModel fit_bagging(const Dataset& train, const HyperParams& hp, uint64_t seed,
                        ForestKind kind) {
  hp.validate();
  if (hp.n_trees < 1) throw ConfigError("bagging forests need n_trees >= 1");
  detail::check_trainable(train);

  const size_t n = train.rows();
  const size_t d = train.cols();
  const size_t n_trees = static_cast<size_t>(hp.n_trees);

  ForestModel model;
  model.kind = kind;
  model.base_score = 0.0;
  model.learning_rate = 1.0;
  model.hp = hp;
  model.seed = seed;
  model.n_features = d;
  model.trees.resize(n_trees);

  const size_t n_candidates =
      std::max<size_t>(1, static_cast<size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  const bool bootstrap = kind == ForestKind::random_forest && hp.bootstrap;
  const size_t bag_size = bootstrap
      ? std::max<size_t>(1, static_cast<size_t>(hp.row_subsample_fraction *
                                                static_cast<double>(n)))
      : n;

  // Per-tree importance slots keep the sum order fixed under parallelism.
  std::vector<std::vector<double>> tree_importance(n_trees);
  runtime::parallel_for(0, n_trees, [&](size_t t) {
    Rng rng(mix_seed(seed, t));
    std::vector<uint32_t> rows;
    rows.reserve(bag_size);
    if (bootstrap) {
      for (size_t i = 0; i < bag_size; ++i)
        rows.push_back(static_cast<uint32_t>(rng.below(n)));
      std::sort(rows.begin(), rows.end());
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    tree_importance[t].assign(d, 0.0);
    BagContext ctx{train, hp,    kind == ForestKind::extra_trees, n_candidates,
                   model.trees[t], tree_importance[t], rng};
    grow_gini_node(ctx, std::move(rows), 0);
  });

  model.feature_importance.assign(d, 0.0);
  for (const std::vector<double>& imp : tree_importance)
    for (size_t j = 0; j < d; ++j) model.feature_importance[j] += imp[j];
  return model;
}

}  // namespace

ForestModel fit_random_forest(const Dataset& train, const HyperParams& hp, uint64_t seed) {
  return fit_bagging(train, hp, seed, ForestKind::random_forest);
}

ForestModel fit_extra_trees(const Dataset& train, const HyperParams& hp, uint64_t seed) {
  return fit_bagging(train, hp, seed, ForestKind::extra_trees);
}

}  // namespace malpipe
