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

// Random forest and extremely randomized trees with Gini impurity.

#ifndef COUGHSCREEN_FOREST_H_
#define COUGHSCREEN_FOREST_H_

#include <cstdint>
#include <vector>

#include "coughscreen/classifiers.h"
#include "coughscreen/tree.h"

namespace coughscreen::models {

struct ForestParams {
  int n_estimators = 100;
  int max_depth = 20;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  // Features examined per split; 0 selects floor(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  // true: best of max_features random thresholds (extra trees);
  // false: best exact threshold (random forest).
  bool random_thresholds = false;

  static ForestParams RandomForestDefaults();
  static ForestParams ExtraTreesDefaults();

  nlohmann::json ToJson() const;
  static ForestParams FromJson(const nlohmann::json& doc, ForestParams base);
};

class ForestModel final : public TrainedModel {
 public:
  ForestModel(ModelKind kind, ForestParams params, std::size_t dim,
              std::vector<Tree> trees)
      : kind_(kind), params_(params), dim_(dim), trees_(std::move(trees)) {}

  ModelKind kind() const override { return kind_; }
  std::size_t dim() const override { return dim_; }
  // Mean over trees of the positive fraction in the reached leaf.
  double Score(std::span<const double> x) const override;
  nlohmann::json Metadata() const override;
  void Store(ModelArchive& archive) const override;
  static std::unique_ptr<ForestModel> Load(const ModelArchive& archive);

  const std::vector<Tree>& trees() const { return trees_; }

 private:
  ModelKind kind_;
  ForestParams params_;
  std::size_t dim_;
  std::vector<Tree> trees_;
};

// kind must be kRandomForest or kExtraTrees.
std::unique_ptr<ForestModel> FitForest(ModelKind kind,
                                       const data::LabeledDataset& train,
                                       const ForestParams& params,
                                       std::uint64_t seed);

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_FOREST_H_
