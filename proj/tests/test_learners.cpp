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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "malpipe/binning.hpp"
#include "malpipe/errors.hpp"
#include "malpipe/split.hpp"
#include "malpipe/trees.hpp"
#include "oracles.hpp"

using namespace malpipe;
using oracles::make_dataset;

namespace {

bool trees_equal(const std::vector<Tree>& a, const std::vector<Tree>& b) {
  if (a.size() != b.size()) return false;
  for (size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) return false;
    for (size_t i = 0; i < a[t].size(); ++i) {
      const TreeNode &x = a[t][i], &y = b[t][i];
      if (x.feature != y.feature || x.left != y.left || x.right != y.right) return false;
      if (std::memcmp(&x.threshold, &y.threshold, sizeof(float)) != 0) return false;
      if (std::memcmp(&x.value, &y.value, sizeof(double)) != 0) return false;
    }
  }
  return true;
}

size_t leaf_count(const Tree& tree) {
  size_t n = 0;
  for (const TreeNode& node : tree) n += node.is_leaf();
  return n;
}

int tree_depth(const Tree& tree, int32_t node = 0) {
  if (tree[node].is_leaf()) return 0;
  return 1 + std::max(tree_depth(tree, tree[node].left), tree_depth(tree, tree[node].right));
}

// x uniform in [-2,-0.5] or [0.5,2]; the label tells the side.
Dataset separable_1d(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(n);
  std::vector<uint8_t> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double mag = rng.uniform(0.5, 2.0);
    x[i] = static_cast<float>(y[i] ? mag : -mag);
  }
  return make_dataset(1, std::move(x), std::move(y));
}

// y = (x0 > 0), with a comfortable margin around zero.
Dataset separable_2d(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(n * 2);
  std::vector<uint8_t> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double sign = y[i] ? 1.0 : -1.0;
    x[i * 2] = static_cast<float>(sign * rng.uniform(0.1, 2.0));
    x[i * 2 + 1] = static_cast<float>(rng.normal());
  }
  return make_dataset(2, std::move(x), std::move(y));
}

double log_loss_from_proba(const std::vector<double>& proba,
                           const std::vector<uint8_t>& labels) {
  double loss = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double p = std::min(std::max(proba[i], 1e-15), 1.0 - 1e-15);
    loss -= labels[i] ? std::log(p) : std::log1p(-p);
  }
  return loss / static_cast<double>(labels.size());
}

HyperParams quick_hp(int n_trees, int max_depth, int msl) {
  HyperParams hp;
  hp.n_trees = n_trees;
  hp.max_depth = max_depth;
  hp.min_samples_leaf = msl;
  return hp;
}

}  // namespace

TEST_CASE("hyperparameter validation rejects out-of-range fields") {
  HyperParams hp;
  hp.n_trees = -1;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.learning_rate = 0.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.n_bins = 1;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.row_subsample_fraction = 1.5;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.min_split_gain = -0.1;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  hp.max_leaves = 1;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = {};
  CHECK_NOTHROW(hp.validate());
}

TEST_CASE("equal-frequency binning with enough bins keeps one value per bin") {
  const Dataset data =
      make_dataset(1, {5, 1, 3, 1, 9, 3, 3, 7}, {0, 1, 0, 1, 0, 1, 0, 1});
  const BinMapper mapper = BinMapper::fit(data, 256);
  REQUIRE(mapper.feature_count() == 1);
  CHECK(mapper.bin_count(0) == 5);  // distinct values 1,3,5,7,9
  CHECK(mapper.code(0, 1.0f) == 0);
  CHECK(mapper.code(0, 3.0f) == 1);
  CHECK(mapper.code(0, 9.0f) == 4);
  // uppers separate adjacent distinct values and route left-inclusively
  for (int b = 0; b + 1 < mapper.bin_count(0); ++b) {
    const float upper = mapper.upper(0, b);
    CHECK(mapper.code(0, upper) == b);
    CHECK(mapper.code(0, std::nextafterf(upper, 1e30f)) == b + 1);
  }
}

TEST_CASE("binning caps the bin count and keeps uppers increasing") {
  Rng rng(77);
  const Dataset data = oracles::random_dataset(rng, 2000, 3);
  const BinMapper mapper = BinMapper::fit(data, 16);
  for (size_t f = 0; f < 3; ++f) {
    CHECK(mapper.bin_count(f) <= 16);
    CHECK(mapper.bin_count(f) >= 2);
    for (int b = 0; b + 2 < mapper.bin_count(f); ++b)
      CHECK(mapper.upper(f, b) < mapper.upper(f, b + 1));
  }
  const BinnedMatrix binned = bin_dataset(mapper, data);
  for (size_t r = 0; r < data.rows(); ++r)
    for (size_t f = 0; f < 3; ++f)
      CHECK(binned.at(r, f) == mapper.code(f, data.at(r, f)));
}

TEST_CASE("split_threshold lands strictly inside the value gap") {
  const float t1 = split_threshold(1.0f, 2.0f);
  CHECK(t1 == 1.5f);
  CHECK(t1 >= 1.0f);
  CHECK(t1 < 2.0f);
  // adjacent floats: the midpoint rounds up to hi, so it must be pulled back
  const float lo = 1.0f;
  const float hi = std::nextafterf(lo, 2.0f);
  const float t2 = split_threshold(lo, hi);
  CHECK(t2 >= lo);
  CHECK(t2 < hi);
}

TEST_CASE("gbdt with zero trees predicts the class prior") {
  Rng rng(5);
  Dataset data = oracles::random_dataset(rng, 40, 3);
  for (size_t i = 0; i < 40; ++i) data.labels[i] = i % 2;

  HyperParams hp = quick_hp(0, 6, 1);
  const ForestModel model = fit_gbdt(data, hp, 1, ForestKind::gbdt_a);
  CHECK(model.trees.empty());
  CHECK(model.base_score == 0.0);  // log(20/20)
  for (double p : predict_proba(model, data)) CHECK(p == 0.5);

  // unbalanced prior: sigmoid(log(30/10)) == 0.75
  for (size_t i = 0; i < 40; ++i) data.labels[i] = i < 30 ? 1 : 0;
  const ForestModel skewed = fit_gbdt(data, hp, 1, ForestKind::gbdt_a);
  CHECK(predict_proba(skewed, data)[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("depth-1 boosting separates 1-D separable data") {
  const Dataset data = separable_1d(50, 9);
  const ForestModel model = fit_gbdt(data, quick_hp(10, 1, 1), 3, ForestKind::gbdt_a);
  REQUIRE(model.trees.size() == 10);

  const std::vector<double> proba = predict_proba(model, data);
  for (size_t i = 0; i < data.rows(); ++i)
    CHECK((proba[i] >= 0.5) == (data.labels[i] == 1));

  // every stump threshold must fall in the gap between the classes
  float max_neg = -1e30f, min_pos = 1e30f;
  for (size_t i = 0; i < data.rows(); ++i) {
    if (data.labels[i]) min_pos = std::min(min_pos, data.at(i, 0));
    else max_neg = std::max(max_neg, data.at(i, 0));
  }
  for (const Tree& tree : model.trees) {
    REQUIRE(tree.size() == 3);
    CHECK(tree[0].feature == 0);
    CHECK(tree[0].threshold >= max_neg);
    CHECK(tree[0].threshold < min_pos);
    CHECK(tree[tree[0].left].value < 0.0);
    CHECK(tree[tree[0].right].value > 0.0);
  }
}

TEST_CASE("histogram split finder matches the exhaustive oracle") {
  Rng rng(1234);
  for (int it = 0; it < 50; ++it) {
    const size_t n = 10 + rng.below(191);  // up to 200
    const size_t d = 1 + rng.below(8);
    std::vector<float> x(n * d);
    for (float& v : x) {
      // coarse half the time so bins collapse duplicates
      v = it % 2 == 0 ? static_cast<float>(rng.below(9)) / 2.0f
                      : static_cast<float>(rng.normal());
    }
    std::vector<uint8_t> y(n, 0);
    const Dataset data = make_dataset(d, std::move(x), std::move(y));

    std::vector<double> grad(n), hess(n);
    for (size_t r = 0; r < n; ++r) {
      grad[r] = rng.normal();
      hess[r] = rng.uniform(0.01, 1.0);
    }

    HyperParams hp;
    hp.n_bins = 256;  // >= n, so the histogram is exact
    hp.min_samples_leaf = 1 + static_cast<int>(rng.below(5));
    const size_t msl = static_cast<size_t>(hp.min_samples_leaf);

    const BinMapper mapper = BinMapper::fit(data, hp.n_bins);
    const BinnedMatrix binned = bin_dataset(mapper, data);
    std::vector<uint32_t> rows(n), features(d);
    std::iota(rows.begin(), rows.end(), 0u);
    std::iota(features.begin(), features.end(), 0u);
    double sum_g = 0.0, sum_h = 0.0;
    for (size_t r = 0; r < n; ++r) {
      sum_g += grad[r];
      sum_h += hess[r];
    }

    const SplitCandidate lib =
        find_best_split_grad(binned, mapper, rows, grad, hess, features, sum_g, sum_h, hp);

    // reference gains per feature from an independent sorted scan
    std::vector<double> ref_gain(d, -1.0);
    for (size_t f = 0; f < d; ++f) {
      std::vector<float> col(n);
      for (size_t r = 0; r < n; ++r) col[r] = data.at(r, f);
      const Dataset view = make_dataset(1, std::move(col), std::vector<uint8_t>(n, 0));
      const oracles::GradSplitRef ref =
          oracles::best_split_grad_ref(view, grad, hess, msl, 0.0);
      if (ref.found()) ref_gain[f] = ref.gain;
    }
    double best_gain = -1.0;
    size_t best_f = d;
    for (size_t f = 0; f < d; ++f) {
      if (ref_gain[f] > best_gain) {
        best_gain = ref_gain[f];
        best_f = f;
      }
    }

    if (best_f == d) {
      CHECK_FALSE(lib.valid());
      continue;
    }
    REQUIRE(lib.valid());
    CHECK(std::fabs(lib.gain - best_gain) <= 1e-9);
    CHECK(std::fabs(lib.gain - ref_gain[static_cast<size_t>(lib.feature)]) <= 1e-9);

    bool ambiguous = false;
    for (size_t f = 0; f < d; ++f)
      if (f != best_f && ref_gain[f] > best_gain - 2e-9) ambiguous = true;
    if (!ambiguous) CHECK(static_cast<size_t>(lib.feature) == best_f);
  }
}

TEST_CASE("logistic gradient and hessian match finite differences") {
  Rng rng(42);
  const double eps = 1e-4;
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform(-6.0, 6.0);
    const double y = static_cast<double>(rng.below(2));
    const double up = oracles::logistic_loss(s + eps, y);
    const double down = oracles::logistic_loss(s - eps, y);
    const double mid = oracles::logistic_loss(s, y);
    CHECK(std::fabs((up - down) / (2.0 * eps) - oracles::logistic_grad(s, y)) <= 1e-6);
    CHECK(std::fabs((up - 2.0 * mid + down) / (eps * eps) - oracles::logistic_hess(s)) <=
          1e-6);
  }
}

TEST_CASE("training loss never increases across boosting rounds") {
  Rng rng(55);
  const size_t n = 300;
  std::vector<float> x(n * 4);
  std::vector<uint8_t> y(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < 4; ++j) x[i * 4 + j] = static_cast<float>(rng.normal());
    const double signal = 1.3 * x[i * 4] - 0.7 * x[i * 4 + 2];
    y[i] = signal + 0.3 * rng.normal() > 0.0 ? 1 : 0;
  }
  Dataset data = make_dataset(4, std::move(x), std::move(y));
  data.labels[0] = 0;
  data.labels[1] = 1;

  for (ForestKind kind : {ForestKind::gbdt_a, ForestKind::gbdt_b}) {
    const ForestModel model = fit_gbdt(data, quick_hp(40, 4, 5), 7, kind);
    ForestModel partial = model;
    double prev = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t <= model.trees.size(); ++t) {
      partial.trees.assign(model.trees.begin(),
                           model.trees.begin() + static_cast<ptrdiff_t>(t));
      const double loss = log_loss_from_proba(predict_proba(partial, data), data.labels);
      CHECK(loss <= prev + 1e-9);
      prev = loss;
    }
  }
}

TEST_CASE("gbdt presets honor their growth bounds") {
  Rng rng(66);
  Dataset data = oracles::random_dataset(rng, 400, 5);
  for (size_t i = 0; i < data.rows(); ++i)
    data.labels[i] = data.at(i, 1) + 0.3f * data.at(i, 3) > 0.0f ? 1 : 0;
  data.labels[0] = 0;
  data.labels[1] = 1;

  HyperParams hp = quick_hp(8, 3, 2);
  hp.max_leaves = 6;

  const ForestModel a = fit_gbdt(data, hp, 21, ForestKind::gbdt_a);
  for (const Tree& tree : a.trees) CHECK(tree_depth(tree) <= 3);  // level-wise cap

  const ForestModel b = fit_gbdt(data, hp, 21, ForestKind::gbdt_b);
  for (const Tree& tree : b.trees) CHECK(leaf_count(tree) <= 6);  // leaf-wise cap

  // the presets really differ on the same data and seed
  CHECK_FALSE(trees_equal(a.trees, b.trees));
}

TEST_CASE("a vanishing stump ends boosting early") {
  const Dataset data = separable_1d(40, 12);  // balanced, so the prior gradient is zero
  HyperParams hp = quick_hp(5, 6, 40);        // leaf floor blocks every split
  const ForestModel model = fit_gbdt(data, hp, 1, ForestKind::gbdt_a);
  CHECK(model.trees.empty());
  for (double p : predict_proba(model, data)) CHECK(p == 0.5);
}

TEST_CASE("hand-built gbdt stump evaluates the logistic of the leaf") {
  ForestModel model;
  model.kind = ForestKind::gbdt_a;
  model.base_score = 0.0;
  model.learning_rate = 1.0;
  model.n_features = 1;
  Tree stump(3);
  stump[0] = TreeNode{0, 0.5f, 0.0, 1, 2};
  stump[1] = TreeNode{-1, 0.0f, -2.0, -1, -1};
  stump[2] = TreeNode{-1, 0.0f, 2.0, -1, -1};
  model.trees.push_back(stump);

  const Dataset probe = make_dataset(1, {1.0f, 0.0f}, {1, 0});
  const std::vector<double> proba = predict_proba(model, probe);
  CHECK(proba[0] == doctest::Approx(0.8808).epsilon(1e-4));   // sigmoid(2)
  CHECK(proba[1] == doctest::Approx(0.11920).epsilon(1e-4));  // sigmoid(-2)
}

TEST_CASE("bagging prediction is the mean of leaf probabilities") {
  ForestModel model;
  model.kind = ForestKind::random_forest;
  model.n_features = 1;
  model.trees.push_back(Tree{TreeNode{-1, 0.0f, 1.0, -1, -1}});
  model.trees.push_back(Tree{TreeNode{-1, 0.0f, 0.0, -1, -1}});
  const Dataset probe = make_dataset(1, {0.0f}, {0});
  CHECK(predict_proba(model, probe)[0] == 0.5);
}

TEST_CASE("gbdt row and feature subsampling stay deterministic") {
  Rng rng(88);
  Dataset data = oracles::random_dataset(rng, 300, 6);
  for (size_t i = 0; i < data.rows(); ++i)
    data.labels[i] = data.at(i, 0) > 0.0f ? 1 : 0;
  data.labels[0] = 0;
  data.labels[1] = 1;

  HyperParams hp = quick_hp(20, 3, 2);
  hp.row_subsample_fraction = 0.6;
  hp.feature_subsample_fraction = 0.5;

  const ForestModel m1 = fit_gbdt(data, hp, 31, ForestKind::gbdt_b);
  const ForestModel m2 = fit_gbdt(data, hp, 31, ForestKind::gbdt_b);
  CHECK(trees_equal(m1.trees, m2.trees));

  const ForestModel m3 = fit_gbdt(data, hp, 32, ForestKind::gbdt_b);
  CHECK_FALSE(trees_equal(m1.trees, m3.trees));

  size_t correct = 0;
  const std::vector<double> proba = predict_proba(m1, data);
  for (size_t i = 0; i < data.rows(); ++i)
    correct += (proba[i] >= 0.5) == (data.labels[i] == 1);
  CHECK(static_cast<double>(correct) / static_cast<double>(data.rows()) > 0.9);
}

TEST_CASE("random forest root split matches the exhaustive gini oracle") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const size_t n = 8 + rng.below(13);  // <= 20 rows
    std::vector<float> x(n);
    std::vector<uint8_t> y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = static_cast<float>(rng.below(6));  // duplicates likely
      y[i] = rng.uniform() < 0.5 ? 0 : 1;
      if (x[i] >= 3.0f && rng.uniform() < 0.7) y[i] = 1;  // correlation
    }
    y[0] = 0;
    y[1] = 1;
    const Dataset data = make_dataset(1, std::move(x), std::move(y));

    HyperParams hp = quick_hp(1, 1, 1);
    hp.bootstrap = false;
    const ForestModel model = fit_random_forest(data, hp, seed);
    REQUIRE(model.trees.size() == 1);
    const Tree& tree = model.trees[0];

    const oracles::GiniSplitRef ref = oracles::best_split_gini_ref(data, 1);
    if (!ref.found()) {
      CHECK(tree.size() == 1);
      continue;
    }
    REQUIRE(tree.size() == 3);
    CHECK(tree[0].feature == 0);
    CHECK(std::fabs(model.feature_importance[0] - ref.gain) <= 1e-12);
    if (!ref.ambiguous()) {  // distinct boundaries can tie on the exact gain
      size_t left_count = 0;
      for (size_t r = 0; r < n; ++r) left_count += data.at(r, 0) <= tree[0].threshold;
      CHECK(left_count == ref.left_count);
    }
  }
}

TEST_CASE("single gini tree separates pure-split data exactly") {
  const Dataset data = separable_1d(20, 31);
  HyperParams hp = quick_hp(1, 1, 1);
  hp.bootstrap = false;
  const ForestModel model = fit_random_forest(data, hp, 2);
  const std::vector<double> proba = predict_proba(model, data);
  for (size_t i = 0; i < data.rows(); ++i)
    CHECK(proba[i] == (data.labels[i] ? 1.0 : 0.0));
}

TEST_CASE("a large forest is confident on noiseless separable data") {
  const Dataset data = separable_2d(200, 17);
  HyperParams hp = quick_hp(500, 6, 5);
  const ForestModel model = fit_random_forest(data, hp, 11);
  CHECK(model.trees.size() == 500);
  const std::vector<double> proba = predict_proba(model, data);
  for (size_t i = 0; i < data.rows(); ++i) {
    const double own = data.labels[i] ? proba[i] : 1.0 - proba[i];
    CHECK(own > 0.85);
  }
}

TEST_CASE("bootstrap resampling reacts to the seed") {
  Rng rng(7);
  Dataset data = oracles::random_dataset(rng, 120, 3);
  for (size_t i = 0; i < data.rows(); ++i)
    data.labels[i] = data.at(i, 2) > 0.0f ? 1 : 0;
  data.labels[0] = 0;
  data.labels[1] = 1;

  const HyperParams hp = quick_hp(10, 4, 2);
  const ForestModel m1 = fit_random_forest(data, hp, 100);
  const ForestModel m2 = fit_random_forest(data, hp, 100);
  const ForestModel m3 = fit_random_forest(data, hp, 101);
  CHECK(trees_equal(m1.trees, m2.trees));
  CHECK_FALSE(trees_equal(m1.trees, m3.trees));
}

TEST_CASE("extra trees never split on a constant feature") {
  Rng rng(19);
  Dataset data = oracles::random_dataset(rng, 150, 4);
  for (size_t r = 0; r < data.rows(); ++r) {
    data.features[r * 4 + 1] = 2.75f;  // constant column
    data.labels[r] = data.at(r, 0) + data.at(r, 2) > 0.0f ? 1 : 0;
  }
  data.labels[0] = 0;
  data.labels[1] = 1;

  const ForestModel model = fit_extra_trees(data, quick_hp(50, 6, 2), 3);
  for (const Tree& tree : model.trees)
    for (const TreeNode& node : tree) CHECK(node.feature != 1);
  CHECK(model.feature_importance[1] == 0.0);
}

TEST_CASE("extra trees are deterministic per seed and ignore bagging knobs") {
  Rng rng(23);
  Dataset data = oracles::random_dataset(rng, 100, 3);
  for (size_t i = 0; i < data.rows(); ++i)
    data.labels[i] = data.at(i, 1) > 0.0f ? 1 : 0;
  data.labels[0] = 0;
  data.labels[1] = 1;

  HyperParams hp = quick_hp(25, 5, 2);
  const ForestModel m1 = fit_extra_trees(data, hp, 77);
  const ForestModel m2 = fit_extra_trees(data, hp, 77);
  CHECK(trees_equal(m1.trees, m2.trees));

  // no bootstrap: the row-subsample fraction cannot change anything
  hp.row_subsample_fraction = 0.5;
  const ForestModel m3 = fit_extra_trees(data, hp, 77);
  CHECK(trees_equal(m1.trees, m3.trees));

  const ForestModel m4 = fit_extra_trees(data, hp, 78);
  CHECK_FALSE(trees_equal(m1.trees, m4.trees));
}

TEST_CASE("extra trees learn the concentric-square regression benchmark") {
  Rng rng(29);
  const size_t n = 400;
  std::vector<float> x(n * 2);
  std::vector<uint8_t> y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i * 2] = static_cast<float>(rng.uniform(-1.0, 1.0));
    x[i * 2 + 1] = static_cast<float>(rng.uniform(-1.0, 1.0));
    y[i] = std::max(std::fabs(x[i * 2]), std::fabs(x[i * 2 + 1])) < 0.5f ? 1 : 0;
  }
  const Dataset data = make_dataset(2, std::move(x), std::move(y));

  const ForestModel model = fit_extra_trees(data, quick_hp(200, 8, 2), 5);
  const std::vector<double> proba = predict_proba(model, data);
  size_t correct = 0;
  for (size_t i = 0; i < n; ++i)
    correct += (proba[i] >= 0.5) == (data.labels[i] == 1);
  const double accuracy = static_cast<double>(correct) / static_cast<double>(n);
  CHECK(accuracy >= 0.95);
  CHECK(accuracy == 398.0 / 400.0);  // pinned regression value
}

TEST_CASE("fit dispatch and fit preconditions") {
  Rng rng(31);
  Dataset data = oracles::random_dataset(rng, 60, 2);
  for (size_t i = 0; i < data.rows(); ++i) data.labels[i] = i % 2;

  const HyperParams hp = quick_hp(5, 3, 1);
  const ForestModel via_kind = fit_forest(data, ForestKind::random_forest, hp, 4);
  const ForestModel direct = fit_random_forest(data, hp, 4);
  CHECK(trees_equal(via_kind.trees, direct.trees));

  CHECK_THROWS_AS(fit_gbdt(data, hp, 1, ForestKind::random_forest), ConfigError);

  Dataset single = data;
  for (auto& label : single.labels) label = 1;
  CHECK_THROWS_WITH_AS(fit_gbdt(single, hp, 1, ForestKind::gbdt_a),
                       doctest::Contains("both classes"), DataError);
  CHECK_THROWS_AS(fit_random_forest(single, hp, 1), DataError);
  CHECK_THROWS_AS(fit_extra_trees(single, hp, 1), DataError);

  Dataset broken = data;
  broken.features[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(fit_gbdt(broken, hp, 1, ForestKind::gbdt_b), DataError);

  const Dataset empty = make_dataset(2, {}, {});
  CHECK_THROWS_AS(fit_extra_trees(empty, hp, 1), DataError);
}

TEST_CASE("predict_proba validates dimensions and stays in bounds") {
  Rng rng(37);
  Dataset data = oracles::random_dataset(rng, 80, 3);
  for (size_t i = 0; i < data.rows(); ++i) data.labels[i] = i % 2;
  const ForestModel model = fit_gbdt(data, quick_hp(15, 4, 2), 5, ForestKind::gbdt_b);

  const Dataset wrong = make_dataset(2, {1, 2}, {0});
  CHECK_THROWS_WITH_AS(predict_proba(model, wrong),
                       doctest::Contains("model expects 3, data has 2"), ModelError);

  Rng probe_rng(38);
  const Dataset probes = oracles::random_dataset(probe_rng, 50, 3);
  for (double p : predict_proba(model, probes)) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(std::isfinite(p));
  }
}

TEST_CASE("gain importance concentrates on the signal feature") {
  Rng rng(41);
  Dataset data = oracles::random_dataset(rng, 200, 4);
  for (size_t i = 0; i < data.rows(); ++i)
    data.labels[i] = data.at(i, 2) > 0.0f ? 1 : 0;
  data.labels[0] = 0;
  data.labels[1] = 1;

  const ForestModel model = fit_gbdt(data, quick_hp(20, 3, 5), 9, ForestKind::gbdt_a);
  REQUIRE(model.feature_importance.size() == 4);
  for (size_t f = 0; f < 4; ++f) {
    CHECK(model.feature_importance[f] >= 0.0);
    if (f != 2) CHECK(model.feature_importance[2] > model.feature_importance[f]);
  }
}
