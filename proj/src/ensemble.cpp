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

#include "malpipe/ensemble.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "malpipe/errors.hpp"
#include "malpipe/runtime.hpp"

namespace malpipe {

VotingEnsemble train_ensemble(const Dataset& partition_a, const Dataset& partition_b,
                              ForestKind kind, const HyperParams& hp_1,
                              const HyperParams& hp_2,
                              std::pair<uint64_t, uint64_t> seeds) {
  if (partition_a.cols() != partition_b.cols())
    throw DataError("partitions must share a feature count");
  VotingEnsemble ensemble;
  ensemble.model_1 = fit_forest(partition_a, kind, hp_1, seeds.first);
  ensemble.model_2 = fit_forest(partition_b, kind, hp_2, seeds.second);
  return ensemble;
}

int select_weight_index(const std::vector<double>& p1, const std::vector<double>& p2,
                        const std::vector<uint8_t>& labels, std::vector<GridEntry>& report) {
  const size_t n = labels.size();
  if (n == 0) throw DataError("weight search needs a nonempty selection set");
  if (p1.size() != n || p2.size() != n)
    throw ModelError("probability vectors must match the label count");

  report.clear();
  report.reserve(11);
  int best_i = -1;
  size_t best_correct = 0;
  for (int i = 0; i <= 10; ++i) {
    const double w1 = static_cast<double>(i) / 10.0;
    const double w2 = 1.0 - w1;
    size_t correct = 0;
    for (size_t r = 0; r < n; ++r) {
      const double p = w1 * p1[r] + w2 * p2[r];
      const uint8_t predicted = p >= 0.5 ? 1 : 0;
      correct += predicted == labels[r];
    }
    report.push_back({w1, static_cast<double>(correct) / static_cast<double>(n)});
    // Tie rule on integers: nearest to the center grid point, then smaller.
    const bool wins = best_i < 0 || correct > best_correct ||
                      (correct == best_correct &&
                       std::abs(i - 5) < std::abs(best_i - 5));
    if (wins) {
      best_i = i;
      best_correct = correct;
    }
  }
  return best_i;
}

void search_weights(VotingEnsemble& ensemble, const Dataset& selection_data) {
  if (selection_data.rows() == 0)
    throw DataError("weight search needs a nonempty selection set");
  const std::vector<double> p1 = predict_proba(ensemble.model_1, selection_data);
  const std::vector<double> p2 = predict_proba(ensemble.model_2, selection_data);
  const int i = select_weight_index(p1, p2, selection_data.labels, ensemble.grid_report);
  ensemble.w1 = static_cast<double>(i) / 10.0;
  ensemble.w2 = 1.0 - ensemble.w1;
  ensemble.weights_set = true;
}

std::pair<std::vector<double>, std::vector<uint8_t>> predict(const VotingEnsemble& ensemble,
                                                             const Dataset& data) {
  if (!ensemble.weights_set)
    throw ModelError("ensemble weights are not set; run the weight search first");
  const std::vector<double> p1 = predict_proba(ensemble.model_1, data);
  const std::vector<double> p2 = predict_proba(ensemble.model_2, data);
  std::vector<double> probabilities(data.rows());
  std::vector<uint8_t> labels(data.rows());
  for (size_t r = 0; r < data.rows(); ++r) {
    probabilities[r] = ensemble.w1 * p1[r] + ensemble.w2 * p2[r];
    labels[r] = probabilities[r] >= 0.5 ? 1 : 0;
  }
  return {std::move(probabilities), std::move(labels)};
}

void TunerConfig::validate() const {
  if (n_trials < 1) throw ConfigError("tuner needs n_trials >= 1");
  if (space.n_trees.lo > space.n_trees.hi || space.n_trees.lo < 0 ||
      space.max_depth.lo > space.max_depth.hi || space.max_depth.lo < 1 ||
      space.max_leaves.lo > space.max_leaves.hi || space.max_leaves.lo < 2 ||
      space.min_samples_leaf.lo > space.min_samples_leaf.hi ||
      space.min_samples_leaf.lo < 1)
    throw ConfigError("tuner search space has an empty or invalid range");
  if (!(space.learning_rate.lo > 0.0) || space.learning_rate.lo > space.learning_rate.hi)
    throw ConfigError("tuner learning_rate range must be positive and ordered");
}

namespace {

int sample_int(Rng& rng, const IntRange& range) {
  return range.lo + static_cast<int>(rng.below(
                        static_cast<uint64_t>(range.hi - range.lo) + 1));
}

double sample_log(Rng& rng, const LogRange& range) {
  return std::exp(rng.uniform(std::log(range.lo), std::log(range.hi)));
}

}  // namespace

TunerResult tune(ForestKind kind, const Dataset& partition, const Dataset& holdout,
                 const TunerConfig& cfg) {
  cfg.validate();
  if (holdout.rows() == 0) throw DataError("tuner needs a nonempty holdout");

  TunerResult result;
  result.trace.resize(cfg.n_trials);
  double best_score = -std::numeric_limits<double>::infinity();

  for (int t = 0; t < cfg.n_trials; ++t) {
    const uint64_t trial_seed = cfg.seed + static_cast<uint64_t>(t);
    Rng rng(trial_seed);
    HyperParams hp = cfg.base;
    hp.n_trees = sample_int(rng, cfg.space.n_trees);
    if (kind == ForestKind::gbdt_b)
      hp.max_leaves = sample_int(rng, cfg.space.max_leaves);
    else
      hp.max_depth = sample_int(rng, cfg.space.max_depth);
    hp.min_samples_leaf = sample_int(rng, cfg.space.min_samples_leaf);
    if (kind == ForestKind::gbdt_a || kind == ForestKind::gbdt_b)
      hp.learning_rate = sample_log(rng, cfg.space.learning_rate);

    TunerTrial& trial = result.trace[t];
    trial.hp = hp;
    try {
      const ForestModel model = fit_forest(partition, kind, hp, trial_seed);
      const std::vector<double> proba = predict_proba(model, holdout);
      size_t correct = 0;
      for (size_t r = 0; r < holdout.rows(); ++r)
        correct += (proba[r] >= 0.5 ? 1 : 0) == holdout.labels[r];
      trial.score = static_cast<double>(correct) / static_cast<double>(holdout.rows());
    } catch (const std::exception&) {
      trial.failed = true;
      trial.score = -std::numeric_limits<double>::infinity();
    }

    if (!trial.failed && trial.score > best_score) {
      best_score = trial.score;
      result.best = hp;
      result.best_trial = t;
    }
  }

  if (result.best_trial < 0) throw ModelError("every tuner trial failed");
  return result;
}

}  // namespace malpipe
