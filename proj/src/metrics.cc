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

#include "coughscreen/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "coughscreen/error.h"

namespace coughscreen::metrics {
namespace {

// Cumulative (fp, tp) counts after each group of tied scores, highest first.
struct Sweep {
  std::vector<double> thresholds;
  std::vector<std::size_t> tp;
  std::vector<std::size_t> fp;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Sweep SweepScores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kSchema, "score and label counts differ");
  }
  Sweep s;
  for (int l : labels) {
    if (l == 1) ++s.positives;
    else if (l == 0) ++s.negatives;
    else throw Error(ErrorKind::kValue, "labels must be 0 or 1");
  }
  if (s.positives == 0 || s.negatives == 0) {
    throw Error(ErrorKind::kUndefinedMetric,
                "metric undefined: labels contain a single class");
  }
  for (double v : scores) {
    if (std::isnan(v)) throw Error(ErrorKind::kValue, "NaN score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    s.thresholds.push_back(v);
    s.tp.push_back(tp);
    s.fp.push_back(fp);
  }
  return s;
}

}  // namespace

std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               std::span<const int> labels) {
  const Sweep s = SweepScores(scores, labels);
  std::vector<RocPoint> curve;
  curve.reserve(s.thresholds.size() + 1);
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (std::size_t g = 0; g < s.thresholds.size(); ++g) {
    curve.push_back({s.thresholds[g],
                     static_cast<double>(s.tp[g]) / static_cast<double>(s.positives),
                     static_cast<double>(s.fp[g]) / static_cast<double>(s.negatives)});
  }
  return curve;
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  const Sweep s = SweepScores(scores, labels);
  // Trapezoids in integer units: each step adds dFP * (TP_prev + TP_cur) / 2.
  // Doubled to stay integral.
  unsigned long long twice_area = 0;
  std::size_t prev_tp = 0, prev_fp = 0;
  for (std::size_t g = 0; g < s.thresholds.size(); ++g) {
    twice_area += static_cast<unsigned long long>(s.fp[g] - prev_fp) * (prev_tp + s.tp[g]);
    prev_tp = s.tp[g];
    prev_fp = s.fp[g];
  }
  return static_cast<double>(twice_area) /
         (2.0 * static_cast<double>(s.positives) * static_cast<double>(s.negatives));
}

double F1Score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

OperatingPoint SelectOperatingPoint(std::span<const double> scores,
                                    std::span<const int> labels,
                                    double spec_floor) {
  const Sweep s = SweepScores(scores, labels);
  const double n_neg = static_cast<double>(s.negatives);
  // Tolerance absorbs representation error in the floor (19/20 vs 0.95).
  auto feasible = [&](std::size_t fp) {
    return (n_neg - static_cast<double>(fp)) / n_neg >= spec_floor - 1e-12;
  };

  // Start from the all-negative threshold, which has specificity 1.
  double best_threshold = std::numeric_limits<double>::infinity();
  std::size_t best_tp = 0, best_fp = 0;
  if (!feasible(0)) {
    throw Error(ErrorKind::kInfeasible, "no threshold satisfies the specificity floor");
  }
  for (std::size_t g = 0; g < s.thresholds.size(); ++g) {
    if (!feasible(s.fp[g])) break;
    if (s.tp[g] > best_tp) {
      best_tp = s.tp[g];
      best_fp = s.fp[g];
      best_threshold = s.thresholds[g];
    }
  }

  OperatingPoint op;
  op.threshold = best_threshold;
  op.tp = best_tp;
  op.fp = best_fp;
  op.fn = s.positives - best_tp;
  op.tn = s.negatives - best_fp;
  op.sensitivity = 100.0 * static_cast<double>(op.tp) / static_cast<double>(s.positives);
  op.specificity = 100.0 * static_cast<double>(op.tn) / n_neg;
  op.precision = op.tp + op.fp > 0
                     ? 100.0 * static_cast<double>(op.tp) / static_cast<double>(op.tp + op.fp)
                     : 0.0;
  op.f1 = op.tp > 0 ? F1Score(op.precision, op.sensitivity) : 0.0;
  return op;
}

namespace {

double Step(double x, int k) {
  const double toward = k > 0 ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::abs(k); ++i) x = std::nextafter(x, toward);
  return x;
}

// Endpoints within a few ulp of mean -/+ half whose floating-point midpoint
// reproduces mean bit for bit. No such pair exists when |mean| is many orders
// of magnitude below half; the rounded endpoints are returned then.
std::pair<double, double> CenteredEndpoints(double mean, double half) {
  const double hi0 = mean + half;
  if (!std::isfinite(hi0)) return {mean - half, hi0};
  for (int dh : {0, 1, -1, 2, -2}) {
    const double hi = Step(hi0, dh);
    for (int dl : {0, 1, -1, 2, -2, 3, -3}) {
      const double lo = Step(2.0 * mean - hi, dl);
      if ((lo + hi) / 2.0 == mean) return {lo, hi};
    }
  }
  return {mean - half, hi0};
}

}  // namespace

ConfidenceInterval NormalConfidenceInterval(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw Error(ErrorKind::kValue, "confidence interval needs at least 2 values");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const auto [low, high] =
      CenteredEndpoints(mean, 1.96 * sd / std::sqrt(static_cast<double>(n)));
  return {mean, low, high};
}

}  // namespace coughscreen::metrics
