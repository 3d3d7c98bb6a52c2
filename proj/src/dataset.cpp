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

#include "malpipe/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "malpipe/runtime.hpp"

namespace malpipe {

size_t Dataset::count_label(uint8_t label) const {
  size_t n = 0;
  for (uint8_t y : labels) n += (y == label);
  return n;
}

Dataset Dataset::subset(const std::vector<size_t>& indices) const {
  Dataset out;
  out.n_cols = n_cols;
  out.features.resize(indices.size() * n_cols);
  out.labels.reserve(indices.size());
  out.row_ids.reserve(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    const size_t r = indices[i];
    std::memcpy(out.features.data() + i * n_cols, features.data() + r * n_cols,
                n_cols * sizeof(float));
    out.labels.push_back(labels[r]);
    out.row_ids.push_back(row_ids[r]);
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, validation_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0))
      throw ConfigError("split fractions must lie in (0,1)");
  }
  const double sum = train_fraction + validation_fraction + test_fraction;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

namespace {

uint64_t row_bytes_hash(const float* p, size_t n_cols) {
  // FNV-1a over the raw bytes; equality is always confirmed by memcmp.
  const auto* bytes = reinterpret_cast<const unsigned char*>(p);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n_cols * sizeof(float); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

bool row_is_finite(const float* p, size_t n_cols) {
  for (size_t j = 0; j < n_cols; ++j)
    if (!std::isfinite(p[j])) return false;
  return true;
}

}  // namespace

std::pair<Dataset, CleanReport> clean(const Dataset& raw) {
  CleanReport report;
  const size_t n = raw.rows();
  const size_t d = raw.n_cols;

  std::vector<size_t> finite_rows;
  finite_rows.reserve(n);
  for (size_t r = 0; r < n; ++r) {
    if (row_is_finite(raw.features.data() + r * d, d))
      finite_rows.push_back(r);
    else
      ++report.missing_removed;
  }

  // Group by bitwise-identical feature vectors.
  struct Group {
    size_t first_row;
    size_t count = 0;
    bool conflict = false;
    uint8_t label;
  };
  std::vector<Group> groups;
  std::unordered_map<uint64_t, std::vector<size_t>> buckets;  // hash -> group ids
  std::vector<size_t> group_of(n, SIZE_MAX);

  for (size_t r : finite_rows) {
    const float* rp = raw.features.data() + r * d;
    const uint64_t h = row_bytes_hash(rp, d);
    auto& bucket = buckets[h];
    size_t gid = SIZE_MAX;
    for (size_t cand : bucket) {
      const float* gp = raw.features.data() + groups[cand].first_row * d;
      if (std::memcmp(rp, gp, d * sizeof(float)) == 0) {
        gid = cand;
        break;
      }
    }
    if (gid == SIZE_MAX) {
      gid = groups.size();
      groups.push_back({r, 0, false, raw.labels[r]});
      bucket.push_back(gid);
    }
    Group& g = groups[gid];
    g.count += 1;
    if (raw.labels[r] != g.label) g.conflict = true;
    group_of[r] = gid;
  }

  std::vector<size_t> kept;
  kept.reserve(finite_rows.size());
  for (size_t r : finite_rows) {
    const Group& g = groups[group_of[r]];
    if (g.conflict) {
      ++report.conflicts_removed;
    } else if (g.first_row == r) {
      kept.push_back(r);
    } else {
      ++report.duplicates_removed;
    }
  }

  if (kept.empty())
    throw EmptyDatasetError("cleaning removed every row", report);
  return {raw.subset(kept), report};
}

std::vector<Dataset> stratified_allocate(const Dataset& data,
                                         const std::vector<double>& fractions,
                                         uint64_t seed) {
  const size_t n_subsets = fractions.size();
  const size_t n = data.rows();
  const double n_total = static_cast<double>(n);

  // Class membership ordered by row_id so the assignment is a pure function
  // of (row_ids, labels, seed), not of row order.
  std::vector<std::vector<size_t>> members(2);
  for (size_t r = 0; r < n; ++r) members[data.labels[r]].push_back(r);
  for (auto& m : members) {
    std::sort(m.begin(), m.end(), [&](size_t a, size_t b) {
      return data.row_ids[a] < data.row_ids[b];
    });
  }

  std::vector<size_t> subset_of(n, SIZE_MAX);
  // assigned[s][c] and per-subset totals drive the remainder rule.
  std::vector<std::array<size_t, 2>> assigned(n_subsets, {0, 0});
  std::vector<size_t> assigned_total(n_subsets, 0);
  std::vector<std::vector<size_t>> leftovers(2);

  for (int c = 0; c < 2; ++c) {
    auto& rows = members[c];
    if (rows.empty()) continue;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(c)));
    rng.shuffle(rows);
    const double n_class = static_cast<double>(rows.size());
    size_t cursor = 0;
    for (size_t s = 0; s < n_subsets; ++s) {
      // nudge so exact-integer products are not floored down by rounding
      size_t take = static_cast<size_t>(std::floor(fractions[s] * n_class + 1e-9));
      take = std::min(take, rows.size() - cursor);
      for (size_t i = 0; i < take; ++i) subset_of[rows[cursor + i]] = s;
      assigned[s][c] += take;
      assigned_total[s] += take;
      cursor += take;
    }
    for (; cursor < rows.size(); ++cursor) leftovers[c].push_back(rows[cursor]);
  }

  // Remainders: each leftover row goes to the subset with the largest
  // class-level deficit, then the largest overall deficit, then the earliest
  // subset in (train, validation, test) order. Keeps every subset's class
  // count within one row of fraction * class_count.
  for (int c = 0; c < 2; ++c) {
    const double n_class = static_cast<double>(members[c].size());
    for (size_t r : leftovers[c]) {
      size_t best = 0;
      double best_class_deficit = -1e300;
      double best_total_deficit = -1e300;
      for (size_t s = 0; s < n_subsets; ++s) {
        const double class_deficit =
            fractions[s] * n_class - static_cast<double>(assigned[s][c]);
        const double total_deficit =
            fractions[s] * n_total - static_cast<double>(assigned_total[s]);
        if (class_deficit > best_class_deficit ||
            (class_deficit == best_class_deficit && total_deficit > best_total_deficit)) {
          best = s;
          best_class_deficit = class_deficit;
          best_total_deficit = total_deficit;
        }
      }
      subset_of[r] = best;
      assigned[best][c] += 1;
      assigned_total[best] += 1;
    }
  }

  // Materialize subsets preserving original row order.
  std::vector<std::vector<size_t>> index_lists(n_subsets);
  for (size_t r = 0; r < n; ++r) index_lists[subset_of[r]].push_back(r);
  std::vector<Dataset> out;
  out.reserve(n_subsets);
  for (auto& idx : index_lists) out.push_back(data.subset(idx));
  return out;
}

SplitResult stratified_split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  for (int c = 0; c < 2; ++c) {
    const size_t count = data.count_label(static_cast<uint8_t>(c));
    if (count < 2)
      throw DataError("stratification infeasible: class " + std::to_string(c) +
                      " has " + std::to_string(count) + " rows, need at least 2");
  }

  auto subsets = stratified_allocate(
      data, {spec.train_fraction, spec.validation_fraction, spec.test_fraction},
      spec.seed);

  SplitResult result;
  result.train = std::move(subsets[0]);
  result.validation = std::move(subsets[1]);
  result.test = std::move(subsets[2]);

  auto halves = stratified_allocate(result.train, {0.5, 0.5}, spec.seed + 1);
  result.partition_a = std::move(halves[0]);
  result.partition_b = std::move(halves[1]);
  return result;
}

}  // namespace malpipe
