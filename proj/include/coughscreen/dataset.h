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

// Manifest ingestion, feature fusion and min-max scaling.

#ifndef COUGHSCREEN_DATASET_H_
#define COUGHSCREEN_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coughscreen/dsp_features.h"
#include "coughscreen/embedding_store.h"
#include "coughscreen/matrix.h"
#include "json.hpp"

namespace coughscreen::data {

inline constexpr int kNegative = 0;
inline constexpr int kPositive = 1;
inline constexpr int kUnknownLabel = -1;

// p / positive / 1 -> 1, n / negative / 0 -> 0, empty / u / unknown -> -1.
// Anything else throws Error(kValue).
int ParseLabel(std::string_view token);

struct ManifestRow {
  std::string clip_id;
  std::string audio_path;
  int label = kUnknownLabel;
  dsp::Gender gender = dsp::Gender::kOther;
  std::optional<int> fold;
};

struct Manifest {
  std::vector<ManifestRow> rows;

  // (negatives, positives)
  std::pair<std::size_t, std::size_t> ClassCounts() const;
  bool HasFolds() const;
};

// Header must contain clip_id,audio_path,label,gender,fold (any order).
Manifest ParseManifest(std::string_view text);
Manifest LoadManifest(const std::filesystem::path& path);

struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;

  bool operator==(const FeatureBlock&) const = default;
};

// Named block layout of a feature row.
struct FeatureSchema {
  std::vector<FeatureBlock> blocks;
  std::string embedding_model;  // empty in handcrafted-only mode

  std::size_t dim() const;
  const FeatureBlock* Find(std::string_view name) const;
  std::vector<std::string> ColumnNames() const;

  nlohmann::json ToJson() const;
  static FeatureSchema FromJson(const nlohmann::json& doc);

  bool operator==(const FeatureSchema&) const = default;
};

// mfcc, chroma, mel, zcr, gender, duration; plus emb_mean / emb_std of width
// embedding_dim when an embedding model is named.
FeatureSchema MakeSchema(const std::string& embedding_model = {},
                         std::size_t embedding_dim = 0);

struct LabeledDataset {
  Matrix features;  // n x d
  std::vector<int> labels;
  FeatureSchema schema;
  std::vector<std::string> clip_ids;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  // Row count agreement, width against schema, finite entries.
  void Validate() const;
  bool AllLabelsKnown() const;
  std::pair<std::size_t, std::size_t> ClassCounts() const;

  LabeledDataset Subset(std::span<const std::size_t> rows) const;
};

// handcrafted || pooled embedding.
std::vector<double> Fuse(const dsp::HandcraftedVector& handcrafted,
                         const embedding::PooledEmbedding* embedding);

// Accumulates fused rows under one schema; rejects rows whose embedding
// presence or width disagrees with it.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(FeatureSchema schema);

  void Add(std::string clip_id, int label,
           const dsp::HandcraftedVector& handcrafted,
           const std::optional<embedding::PooledEmbedding>& embedding);

  LabeledDataset Build() &&;

 private:
  LabeledDataset data_;
};

class MinMaxScaler {
 public:
  static MinMaxScaler Fit(const Matrix& train);
  static MinMaxScaler Fit(const LabeledDataset& train) {
    return Fit(train.features);
  }
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> mins, std::vector<double> maxs);

  // (x - min) / (max - min), clipped to [0, 1]; constant features map to 0.
  double Transform(std::size_t feature, double x) const;
  Matrix Apply(const Matrix& x) const;
  LabeledDataset Apply(const LabeledDataset& data) const;

  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }
  std::size_t dim() const { return mins_.size(); }

  bool operator==(const MinMaxScaler&) const = default;

 private:
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

// <stem>.schema.json next to a feature CSV.
std::filesystem::path SchemaPathFor(const std::filesystem::path& csv_path);

// clip_id, feature columns, label ("1", "0" or empty for unknown), plus the
// schema sidecar.
void WriteFeatureCsv(const std::filesystem::path& path,
                     const LabeledDataset& data);
LabeledDataset ReadFeatureCsv(const std::filesystem::path& path);

}  // namespace coughscreen::data

#endif  // COUGHSCREEN_DATASET_H_
