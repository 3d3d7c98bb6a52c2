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

#include "malpipe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "malpipe/errors.hpp"

namespace malpipe {

ConfusionCounts confusion(const std::vector<uint8_t>& labels,
                          const std::vector<uint8_t>& predicted) {
  if (labels.size() != predicted.size())
    throw DataError("confusion: label/prediction length mismatch");
  if (labels.empty()) throw DataError("confusion: empty inputs");
  ConfusionCounts c;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1)
      predicted[i] == 1 ? ++c.tp : ++c.fn;
    else
      predicted[i] == 1 ? ++c.fp : ++c.tn;
  }
  return c;
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  ClassificationMetrics m{};
  const double n = static_cast<double>(c.total());
  m.accuracy = static_cast<double>(c.tp + c.tn) / n;
  m.degenerate = false;
  if (c.tp + c.fp == 0) {
    m.precision = 0.0;
    m.degenerate = true;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall = 0.0;
    m.degenerate = true;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1 = 0.0;
    if (c.tp + c.fn > 0) m.degenerate = true;  // positives existed, none found
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

RocResult roc_auc(const std::vector<uint8_t>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size())
    throw DataError("roc_auc: label/score length mismatch");
  const size_t n = labels.size();
  size_t n_pos = 0;
  for (uint8_t y : labels) n_pos += (y == 1);
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_auc: AUC undefined, labels contain a single class");
  for (double s : scores)
    if (!std::isfinite(s)) throw DataError("roc_auc: non-finite score");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Rank-sum with average ranks over tie groups.
  double rank_sum_pos = 0.0;
  {
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      size_t pos_in_group = 0;
      while (j < n && scores[order[j]] == scores[order[i]]) {
        pos_in_group += (labels[order[j]] == 1);
        ++j;
      }
      const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      rank_sum_pos += avg_rank * static_cast<double>(pos_in_group);
      i = j;
    }
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  const double auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);

  // Threshold sweep from the highest score down; equal scores collapse into
  // one step so the trapezoid area matches the tie-credited statistic.
  RocResult result;
  result.auc = auc;
  result.points.emplace_back(0.0, 0.0);
  size_t tp = 0, fp = 0;
  size_t i = n;  // walk `order` from the back (descending scores)
  while (i > 0) {
    const double s = scores[order[i - 1]];
    while (i > 0 && scores[order[i - 1]] == s) {
      (labels[order[i - 1]] == 1) ? ++tp : ++fp;
      --i;
    }
    result.points.emplace_back(static_cast<double>(fp) / nn,
                               static_cast<double>(tp) / np);
  }
  return result;
}

MetricsReport evaluate_metrics(const std::vector<uint8_t>& labels,
                               const std::vector<double>& scores,
                               const std::vector<uint8_t>& predicted) {
  MetricsReport report;
  const ConfusionCounts c = confusion(labels, predicted);
  report.tp = c.tp;
  report.fp = c.fp;
  report.tn = c.tn;
  report.fn = c.fn;
  const ClassificationMetrics m = classification_metrics(c);
  report.accuracy = m.accuracy;
  report.precision = m.precision;
  report.recall = m.recall;
  report.f1 = m.f1;
  report.degenerate = m.degenerate;
  RocResult roc = roc_auc(labels, scores);
  report.auc = roc.auc;
  report.roc_points = std::move(roc.points);
  return report;
}

}  // namespace malpipe
