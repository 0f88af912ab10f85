// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ROC analysis and the fixed-specificity operating point used to report
// screening performance.

#ifndef COUGHSCREEN_METRICS_H_
#define COUGHSCREEN_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace coughscreen::metrics {

struct RocPoint {
  double threshold;  // predict positive when score >= threshold
  double tpr;
  double fpr;
};

// Starts at (+inf, 0, 0) and walks distinct scores in descending order down
// to (min score, 1, 1).
std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               std::span<const int> labels);

// Trapezoidal area under RocCurve. Ties contribute half, so this equals the
// Mann-Whitney pair statistic. Throws Error(kUndefinedMetric) unless both
// classes are present.
double Auc(std::span<const double> scores, std::span<const int> labels);

struct OperatingPoint {
  double threshold = 0.0;
  // Percentages in [0, 100].
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Highest-sensitivity threshold whose specificity is at least spec_floor
// (a fraction); ties resolve to the higher threshold.
OperatingPoint SelectOperatingPoint(std::span<const double> scores,
                                    std::span<const int> labels,
                                    double spec_floor = 0.95);

// Harmonic mean of two percentages; 0 when both are 0.
double F1Score(double precision, double recall);

struct ConfidenceInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// mean +/- 1.96 s / sqrt(n), s the sample standard deviation. Needs n >= 2.
ConfidenceInterval NormalConfidenceInterval(std::span<const double> values);

}  // namespace coughscreen::metrics

#endif  // COUGHSCREEN_METRICS_H_
