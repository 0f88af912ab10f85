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

// Stratified k-fold cross-validation over several seeds.

#ifndef COUGHSCREEN_EXPERIMENT_H_
#define COUGHSCREEN_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coughscreen/classifiers.h"
#include "coughscreen/dataset.h"
#include "coughscreen/metrics.h"
#include "json.hpp"

namespace coughscreen::experiment {

struct FeatureConfig {
  bool handcrafted = true;
  std::string embedding_model;  // empty: none
};

struct ExperimentPlan {
  FeatureConfig features;
  models::ModelSpec model;
  std::size_t num_folds = 5;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double spec_floor = 0.95;
  // Per-row fold ids supplied with the data. When set they are used for
  // every seed and num_folds must equal the number of distinct ids.
  std::optional<std::vector<int>> fixed_folds;

  // Throws Error(kValue).
  void Validate() const;
  nlohmann::json ToJson() const;
};

struct CvEntry {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  double auc = 0.0;
  metrics::OperatingPoint op;
};

struct ExperimentReport {
  ExperimentPlan plan;
  std::vector<CvEntry> entries;  // ordered by fold, then seed
  double avg_auc = 0.0;
  std::optional<metrics::ConfidenceInterval> ci;  // needs >= 2 entries
  double wall_clock_seconds = 0.0;
};

// Fold index per row. Each class is shuffled with `seed` and dealt round
// robin, positives first. Throws Error(kStratification) when either class
// has fewer than k rows.
std::vector<std::size_t> StratifiedFolds(std::span<const int> labels, std::size_t k,
                                         std::uint64_t seed);

// Maps fold ids to 0..k-1 in ascending id order.
std::vector<std::size_t> NormalizeFoldIds(std::span<const int> ids, std::size_t* k = nullptr);

// Training rows (fold != f) and held-out rows (fold == f).
struct FoldSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> held_out_rows;
};
FoldSplit SplitFold(std::span<const std::size_t> folds, std::size_t f);
data::MinMaxScaler FitFoldScaler(const data::LabeledDataset& data,
                                 std::span<const std::size_t> folds, std::size_t f);

// One (fold, seed) cell: scale, SVM-SMOTE, fit, score the held-out fold.
CvEntry RunCell(const data::LabeledDataset& data, std::span<const std::size_t> folds,
                std::size_t fold, std::uint64_t seed, const ExperimentPlan& plan);

// Cells run in parallel; errors carry fold/seed context and keep their kind.
ExperimentReport RunCv(const data::LabeledDataset& data, const ExperimentPlan& plan);

nlohmann::json ReportToJson(const ExperimentReport& report, bool include_wall_clock = true);

}  // namespace coughscreen::experiment

#endif  // COUGHSCREEN_EXPERIMENT_H_
