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

// Gradient-boosted decision trees for binary log-loss. Leaf-wise growth with
// exact split search, per-round row bagging, per-tree feature sampling and
// validation-AUC early stopping.

#ifndef COUGHSCREEN_GBM_H_
#define COUGHSCREEN_GBM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "coughscreen/classifiers.h"
#include "coughscreen/tree.h"

namespace coughscreen::models {

struct GbmParams {
  double learning_rate = 0.03;
  int num_iterations = 10000;
  double subsample = 0.68;
  int subsample_freq = 1;
  double colsample_bytree = 0.28;
  int early_stopping_rounds = 100;
  int num_leaves = 31;
  int min_data_in_leaf = 20;
  double min_sum_hessian_in_leaf = 1e-3;
  double lambda_l2 = 1e-3;
  int max_depth = -1;  // unlimited

  nlohmann::json ToJson() const;
  static GbmParams FromJson(const nlohmann::json& doc);
};

class GbmModel final : public TrainedModel {
 public:
  GbmModel() = default;

  ModelKind kind() const override { return ModelKind::kGbm; }
  std::size_t dim() const override { return dim_; }
  double Score(std::span<const double> x) const override;
  nlohmann::json Metadata() const override;
  void Store(ModelArchive& archive) const override;
  static std::unique_ptr<GbmModel> Load(const ModelArchive& archive);

  double RawScore(std::span<const double> x) const;
  const std::vector<Tree>& trees() const { return trees_; }
  const GbmParams& params() const { return params_; }
  int best_iteration() const { return best_iteration_; }
  int iterations_run() const { return iterations_run_; }
  const std::string& stopping_reason() const { return stopping_reason_; }
  // Mean training log-loss after each round (not persisted).
  const std::vector<double>& train_loss() const { return train_loss_; }
  const std::vector<double>& valid_auc() const { return valid_auc_; }

 private:
  friend std::unique_ptr<GbmModel> FitGbm(const data::LabeledDataset&,
                                          const data::LabeledDataset*,
                                          const GbmParams&, std::uint64_t);

  GbmParams params_;
  std::size_t dim_ = 0;
  double init_score_ = 0.0;
  std::vector<Tree> trees_;  // leaf values already include the learning rate
  int iterations_run_ = 0;
  int best_iteration_ = 0;
  std::string stopping_reason_;
  std::vector<double> train_loss_;
  std::vector<double> valid_auc_;
};

// `valid` may be null; early stopping is active only when it is non-null,
// holds both classes, and early_stopping_rounds > 0.
std::unique_ptr<GbmModel> FitGbm(const data::LabeledDataset& train,
                                 const data::LabeledDataset* valid,
                                 const GbmParams& params, std::uint64_t seed);

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_GBM_H_
