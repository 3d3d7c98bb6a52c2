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
#include <span>
#include <vector>

#include "malpipe/errors.hpp"

namespace malpipe {

// Row-major feature matrix plus binary labels (0 = benign, 1 = malicious)
// and stable per-row ids. Immutable by convention once built; every
// pipeline stage consumes one Dataset and produces another.
struct Dataset {
  size_t n_cols = 0;
  std::vector<float> features;   // n_rows * n_cols, row-major
  std::vector<uint8_t> labels;   // n_rows
  std::vector<uint64_t> row_ids; // n_rows

  size_t rows() const { return n_cols == 0 ? 0 : features.size() / n_cols; }
  size_t cols() const { return n_cols; }

  float at(size_t r, size_t j) const { return features[r * n_cols + j]; }
  std::span<const float> row(size_t r) const { return {features.data() + r * n_cols, n_cols}; }

  size_t count_label(uint8_t label) const;

  // New Dataset holding the given rows, in the given order.
  Dataset subset(const std::vector<size_t>& indices) const;
};

struct CleanReport {
  size_t missing_removed = 0;    // rows with any NaN/Inf feature
  size_t duplicates_removed = 0; // later copies of a feature-identical row, same label
  size_t conflicts_removed = 0;  // all members of feature-identical groups with mixed labels
};

// Thrown when cleaning leaves nothing; carries the counts so callers can
// still report what happened.
class EmptyDatasetError : public DataError {
public:
  EmptyDatasetError(const std::string& msg, CleanReport report)
      : DataError(msg), report(report) {}
  CleanReport report;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  uint64_t seed = 0;

  void validate() const;  // fractions in (0,1), sum to 1 within 1e-9
};

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
  Dataset partition_a;  // stratified halves of train, seed+1
  Dataset partition_b;
};

// Drops rows with non-finite features, then resolves feature-identical rows:
// a group with one label keeps its first occurrence, a group with mixed
// labels is removed entirely. First-occurrence order is preserved.
// Throws EmptyDatasetError when nothing survives.
std::pair<Dataset, CleanReport> clean(const Dataset& raw);

// Deterministic stratified split. Per class the rows are ordered by row_id,
// shuffled with a class-derived seed, and dealt to the subsets by the
// floor-plus-largest-deficit rule; assignment depends only on
// (row_ids, labels, seed). Train is further halved with seed+1.
SplitResult stratified_split(const Dataset& data, const SplitSpec& spec);

// Generic allocator behind stratified_split, exposed for the partition step
// after reduction: splits `data` into fractions.size() stratified subsets.
std::vector<Dataset> stratified_allocate(const Dataset& data,
                                         const std::vector<double>& fractions,
                                         uint64_t seed);

}  // namespace malpipe
