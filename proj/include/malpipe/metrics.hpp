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

namespace malpipe {

struct ConfusionCounts {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  size_t total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, auc = 0;
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool degenerate = false;  // a zero-denominator metric was forced to 0
  std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
};

// Positive class is malicious (label 1) throughout.
ConfusionCounts confusion(const std::vector<uint8_t>& labels,
                          const std::vector<uint8_t>& predicted);

// accuracy, precision, recall, f1. Zero denominators yield 0.0 and set
// the degenerate flag on the caller-side report.
struct ClassificationMetrics {
  double accuracy, precision, recall, f1;
  bool degenerate;
};
ClassificationMetrics classification_metrics(const ConfusionCounts& c);

// AUC via the Mann-Whitney rank statistic (ties half-credited) plus the
// ROC curve from a grouped threshold sweep; the trapezoid over the points
// reproduces the statistic to 1e-12.
struct RocResult {
  double auc;
  std::vector<std::pair<double, double>> points;
};
RocResult roc_auc(const std::vector<uint8_t>& labels, const std::vector<double>& scores);

// Full report from labels, scores and the 0.5 decision threshold outputs.
MetricsReport evaluate_metrics(const std::vector<uint8_t>& labels,
                               const std::vector<double>& scores,
                               const std::vector<uint8_t>& predicted);

}  // namespace malpipe
