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
#include <numeric>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"
#include "malpipe/split.hpp"

namespace malpipe {

SplitCandidate find_best_split_grad(const BinnedMatrix& binned, const BinMapper& mapper,
                                    const std::vector<uint32_t>& rows,
                                    const std::vector<double>& grad,
                                    const std::vector<double>& hess,
                                    const std::vector<uint32_t>& features,
                                    double sum_g, double sum_h, const HyperParams& hp) {
  const size_t n = rows.size();
  const size_t msl = static_cast<size_t>(hp.min_samples_leaf);
  std::vector<SplitCandidate> per_feature(features.size());

  runtime::parallel_for(0, features.size(), [&](size_t fi) {
    const uint32_t f = features[fi];
    const int nb = mapper.bin_count(f);
    if (nb < 2) return;
    const uint16_t* codes = binned.column(f);

    std::vector<double> hg(nb, 0.0), hh(nb, 0.0);
    std::vector<size_t> hc(nb, 0);
    for (uint32_t r : rows) {
      const uint16_t b = codes[r];
      hg[b] += grad[r];
      hh[b] += hess[r];
      hc[b] += 1;
    }

    SplitCandidate best;
    double gl = 0.0, hl = 0.0;
    size_t cl = 0;
    for (int b = 0; b + 1 < nb; ++b) {
      gl += hg[b];
      hl += hh[b];
      cl += hc[b];
      if (cl < msl) continue;
      if (n - cl < msl) break;
      const double gr = sum_g - gl;
      const double hr = sum_h - hl;
      const double gain = 0.5 * (gl * gl / (hl + 1.0) + gr * gr / (hr + 1.0) -
                                 (gl + gr) * (gl + gr) / (hl + hr + 1.0));
      if (gain > 0.0 && gain >= hp.min_split_gain && (!best.valid() || gain > best.gain)) {
        best.feature = static_cast<int32_t>(f);
        best.bin = b;
        best.threshold = mapper.upper(f, b);
        best.gain = gain;
      }
    }
    per_feature[fi] = best;
  });

  SplitCandidate best;
  for (const SplitCandidate& cand : per_feature)
    if (cand.valid() && (!best.valid() || cand.gain > best.gain)) best = cand;
  return best;
}

namespace {

struct NodeState {
  int32_t node_id;
  std::vector<uint32_t> rows;
  double sum_g, sum_h;
};

struct GrowContext {
  const BinnedMatrix& binned;
  const BinMapper& mapper;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const std::vector<uint32_t>& features;
  const HyperParams& hp;
  Tree& tree;
  std::vector<double>& importance;
  // Leaf row sets so training scores can be bumped without re-routing.
  std::vector<std::pair<std::vector<uint32_t>, double>>& leaves;
};

double leaf_value(double sum_g, double sum_h) { return -sum_g / (sum_h + 1.0); }

void finalize_leaf(GrowContext& ctx, NodeState&& ns) {
  const double value = leaf_value(ns.sum_g, ns.sum_h);
  ctx.tree[ns.node_id].value = value;
  ctx.leaves.emplace_back(std::move(ns.rows), value);
}

// Splits ns in place: writes the internal node, creates the children and
// returns their states. Row order is preserved on both sides.
std::pair<NodeState, NodeState> apply_split(GrowContext& ctx, NodeState&& ns,
                                            const SplitCandidate& split) {
  const int32_t left_id = static_cast<int32_t>(ctx.tree.size());
  const int32_t right_id = left_id + 1;
  {
    TreeNode& node = ctx.tree[ns.node_id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
  }
  ctx.tree.emplace_back();
  ctx.tree.emplace_back();
  ctx.importance[split.feature] += split.gain;

  NodeState left{left_id, {}, 0.0, 0.0};
  NodeState right{right_id, {}, 0.0, 0.0};
  const uint16_t* codes = ctx.binned.column(split.feature);
  for (uint32_t r : ns.rows) {
    if (codes[r] <= split.bin) {
      left.rows.push_back(r);
      left.sum_g += ctx.grad[r];
      left.sum_h += ctx.hess[r];
    } else {
      right.rows.push_back(r);
      right.sum_g += ctx.grad[r];
      right.sum_h += ctx.hess[r];
    }
  }
  ns.rows.clear();
  return {std::move(left), std::move(right)};
}

SplitCandidate node_split(const GrowContext& ctx, const NodeState& ns) {
  if (ns.rows.size() < 2 * static_cast<size_t>(ctx.hp.min_samples_leaf)) return {};
  return find_best_split_grad(ctx.binned, ctx.mapper, ns.rows, ctx.grad, ctx.hess,
                              ctx.features, ns.sum_g, ns.sum_h, ctx.hp);
}

void grow_level_wise(GrowContext& ctx, NodeState&& root) {
  std::vector<NodeState> frontier;
  frontier.push_back(std::move(root));
  for (int depth = 0; depth < ctx.hp.max_depth && !frontier.empty(); ++depth) {
    std::vector<NodeState> next;
    for (NodeState& ns : frontier) {
      const SplitCandidate split = node_split(ctx, ns);
      if (!split.valid()) {
        finalize_leaf(ctx, std::move(ns));
        continue;
      }
      auto [left, right] = apply_split(ctx, std::move(ns), split);
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    frontier = std::move(next);
  }
  for (NodeState& ns : frontier) finalize_leaf(ctx, std::move(ns));
}

void grow_leaf_wise(GrowContext& ctx, NodeState&& root) {
  struct OpenLeaf {
    NodeState state;
    SplitCandidate split;
  };
  std::vector<OpenLeaf> open;
  open.push_back({std::move(root), {}});
  open.back().split = node_split(ctx, open.back().state);

  int leaf_count = 1;
  while (leaf_count < ctx.hp.max_leaves) {
    // Earliest-created leaf wins gain ties.
    size_t pick = open.size();
    for (size_t i = 0; i < open.size(); ++i)
      if (open[i].split.valid() &&
          (pick == open.size() || open[i].split.gain > open[pick].split.gain))
        pick = i;
    if (pick == open.size()) break;

    OpenLeaf chosen = std::move(open[pick]);
    open.erase(open.begin() + static_cast<ptrdiff_t>(pick));
    auto [left, right] = apply_split(ctx, std::move(chosen.state), chosen.split);
    open.push_back({std::move(left), {}});
    open.back().split = node_split(ctx, open.back().state);
    open.push_back({std::move(right), {}});
    open.back().split = node_split(ctx, open.back().state);
    ++leaf_count;
  }
  for (OpenLeaf& leaf : open) finalize_leaf(ctx, std::move(leaf.state));
}

// Recursive copy so serialized trees read root-first regardless of the
// order growth created the nodes in.
int32_t copy_preorder(const Tree& in, int32_t node, Tree& out) {
  const int32_t id = static_cast<int32_t>(out.size());
  out.push_back(in[node]);
  if (!in[node].is_leaf()) {
    out[id].left = copy_preorder(in, in[node].left, out);
    out[id].right = copy_preorder(in, in[node].right, out);
  }
  return id;
}

Tree to_preorder(const Tree& in) {
  Tree out;
  out.reserve(in.size());
  copy_preorder(in, 0, out);
  return out;
}

}  // namespace

ForestModel fit_gbdt(const Dataset& train, const HyperParams& hp, uint64_t seed,
                     ForestKind preset) {
  if (preset != ForestKind::gbdt_a && preset != ForestKind::gbdt_b)
    throw ConfigError("fit_gbdt requires a gbdt preset");
  hp.validate();
  detail::check_trainable(train);

  const size_t n = train.rows();
  const size_t d = train.cols();
  const size_t pos = train.count_label(1);

  ForestModel model;
  model.kind = preset;
  model.base_score = std::log(static_cast<double>(pos) / static_cast<double>(n - pos));
  model.learning_rate = hp.learning_rate;
  model.hp = hp;
  model.seed = seed;
  model.n_features = d;
  model.feature_importance.assign(d, 0.0);

  const BinMapper mapper = BinMapper::fit(train, hp.n_bins);
  const BinnedMatrix binned = bin_dataset(mapper, train);

  std::vector<double> scores(n, model.base_score);
  std::vector<double> grad(n), hess(n);

  std::vector<uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::vector<uint32_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  for (int t = 0; t < hp.n_trees; ++t) {
    runtime::parallel_for(0, n, [&](size_t r) {
      const double p = sigmoid(scores[r]);
      grad[r] = p - static_cast<double>(train.labels[r]);
      hess[r] = p * (1.0 - p);
    });

    Rng rng(mix_seed(seed, static_cast<uint64_t>(t)));
    std::vector<uint32_t> rows = all_rows;
    if (hp.row_subsample_fraction < 1.0) {
      const size_t m = std::max<size_t>(
          1, static_cast<size_t>(hp.row_subsample_fraction * static_cast<double>(n)));
      rows.clear();
      for (size_t i : rng.sample_without_replacement(n, m))
        rows.push_back(static_cast<uint32_t>(i));
    }
    std::vector<uint32_t> features = all_features;
    if (hp.feature_subsample_fraction < 1.0) {
      const size_t m = std::max<size_t>(
          1, static_cast<size_t>(hp.feature_subsample_fraction * static_cast<double>(d)));
      features.clear();
      for (size_t i : rng.sample_without_replacement(d, m))
        features.push_back(static_cast<uint32_t>(i));
    }

    NodeState root{0, std::move(rows), 0.0, 0.0};
    for (uint32_t r : root.rows) {
      root.sum_g += grad[r];
      root.sum_h += hess[r];
    }

    Tree tree(1);
    std::vector<std::pair<std::vector<uint32_t>, double>> leaves;
    GrowContext ctx{binned,   mapper, grad, hess, features,
                    hp,       tree,   model.feature_importance, leaves};
    if (preset == ForestKind::gbdt_a)
      grow_level_wise(ctx, std::move(root));
    else
      grow_leaf_wise(ctx, std::move(root));

    // A further stump-less round cannot budge any prediction; nor can the
    // ones after it, so stop.
    if (tree.size() == 1 && std::abs(tree[0].value) < 1e-12) break;

    for (const auto& [leaf_rows, value] : leaves)
      for (uint32_t r : leaf_rows) scores[r] += hp.learning_rate * value;

    model.trees.push_back(to_preorder(tree));
  }
  return model;
}

}  // namespace malpipe
