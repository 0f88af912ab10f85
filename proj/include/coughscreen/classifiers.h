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

// The five back-end classifiers behind one interface: fit from a spec,
// score rows, round-trip through a versioned archive.

#ifndef COUGHSCREEN_CLASSIFIERS_H_
#define COUGHSCREEN_CLASSIFIERS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coughscreen/dataset.h"
#include "json.hpp"

namespace coughscreen::models {

enum class ModelKind { kGbm, kSvm, kRandomForest, kExtraTrees, kMlp };

const char* ModelKindName(ModelKind kind);
// gbm | svm | random_forest | extra_trees | mlp; throws Error(kValue).
ModelKind ParseModelKind(std::string_view name);

// Kind plus fully resolved hyperparameters. Overrides are merged onto the
// per-kind defaults; unknown keys and ill-typed values are rejected.
struct ModelSpec {
  ModelKind kind = ModelKind::kGbm;
  nlohmann::json params;
  std::uint64_t seed = 0;

  static ModelSpec Make(ModelKind kind, const nlohmann::json& overrides = {},
                        std::uint64_t seed = 0);
};

// Raw parameter blobs stored alongside the JSON header of an archive.
struct ModelArchive {
  nlohmann::json header;
  std::vector<std::vector<double>> blobs;
};

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t dim() const = 0;
  // Higher means more likely positive. Probabilities except for the SVM,
  // which returns its decision value.
  virtual double Score(std::span<const double> x) const = 0;
  // Iterations used, stopping reason and similar training facts.
  virtual nlohmann::json Metadata() const = 0;
  // Writes "params" and fitted state; kind/dim are added by SaveModel.
  virtual void Store(ModelArchive& archive) const = 0;
};

// GBM uses `valid` for early stopping when non-null; other kinds ignore it.
std::unique_ptr<TrainedModel> Fit(const ModelSpec& spec,
                                  const data::LabeledDataset& train,
                                  const data::LabeledDataset* valid = nullptr);

// Throws Error(kSchema) on width mismatch or non-finite features.
std::vector<double> PredictScores(const TrainedModel& model,
                                  const data::LabeledDataset& data);

ModelArchive ToArchive(const TrainedModel& model);
std::unique_ptr<TrainedModel> FromArchive(const ModelArchive& archive);

// Binary container: 8-byte magic, u32 version, CBOR header, raw double blobs.
void WriteArchive(const std::filesystem::path& path, const ModelArchive& archive);
ModelArchive ReadArchive(const std::filesystem::path& path);

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_CLASSIFIERS_H_
