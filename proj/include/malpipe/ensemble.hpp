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
#include <utility>
#include <vector>

#include "malpipe/dataset.hpp"
#include "malpipe/trees.hpp"

namespace malpipe {

struct GridEntry {
  double w1 = 0.0;
  double accuracy = 0.0;
};

// Soft vote p-hat = w1*p1 + w2*p2 over two instances of one learner, each
// trained on its own stratified half of the training split. w1 lives on
// the grid {0.0, 0.1, ..., 1.0} and w2 = 1 - w1.
struct VotingEnsemble {
  ForestModel model_1;
  ForestModel model_2;
  bool weights_set = false;
  double w1 = 0.0;
  double w2 = 0.0;
  std::vector<GridEntry> grid_report;  // 11 entries once searched
};

VotingEnsemble train_ensemble(const Dataset& partition_a, const Dataset& partition_b,
                              ForestKind kind, const HyperParams& hp_1,
                              const HyperParams& hp_2,
                              std::pair<uint64_t, uint64_t> seeds);

// Pure grid evaluation on probability vectors; returns the winning grid
// index i (w1 = i/10). Ties go to the highest accuracy, then the w1
// nearest 0.5, then the smaller w1.
int select_weight_index(const std::vector<double>& p1, const std::vector<double>& p2,
                        const std::vector<uint8_t>& labels, std::vector<GridEntry>& report);

// Evaluates the 11 grid points on selection_data and freezes the winner.
void search_weights(VotingEnsemble& ensemble, const Dataset& selection_data);

// p-hat per row plus thresholded labels (1 iff p-hat >= 0.5). Weights must
// have been set.
std::pair<std::vector<double>, std::vector<uint8_t>> predict(const VotingEnsemble& ensemble,
                                                             const Dataset& data);

struct IntRange {
  int lo = 0, hi = 0;  // inclusive
};

struct LogRange {
  double lo = 0.0, hi = 0.0;
};

struct SearchSpace {
  IntRange n_trees{100, 500};
  IntRange max_depth{4, 10};     // gbdt_a, random_forest, extra_trees
  IntRange max_leaves{15, 127};  // gbdt_b
  LogRange learning_rate{0.01, 0.3};
  IntRange min_samples_leaf{5, 50};
};

// Seeded uniform random search maximizing holdout accuracy. Sampled
// fields overwrite a copy of `base`; everything else (bins, subsampling,
// fields the learner kind ignores) is inherited from it.
struct TunerConfig {
  int n_trials = 20;
  SearchSpace space;
  HyperParams base;
  uint64_t seed = 0;

  void validate() const;
};

struct TunerTrial {
  HyperParams hp;
  double score = 0.0;
  bool failed = false;
};

struct TunerResult {
  HyperParams best;
  int best_trial = -1;
  std::vector<TunerTrial> trace;
};

// Trial t samples with and fits under seed cfg.seed + t, so results do not
// depend on evaluation order. Failed fits score -inf; every trial failing
// is an error. Ties go to the earliest trial.
TunerResult tune(ForestKind kind, const Dataset& partition, const Dataset& holdout,
                 const TunerConfig& cfg);

}  // namespace malpipe
