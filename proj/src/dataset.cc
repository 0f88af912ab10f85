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

#include "coughscreen/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_set>

#include "coughscreen/csv.h"
#include "coughscreen/error.h"

namespace coughscreen::data {

namespace fs = std::filesystem;
using nlohmann::json;

int ParseLabel(std::string_view token) {
  if (token == "p" || token == "positive" || token == "1") return kPositive;
  if (token == "n" || token == "negative" || token == "0") return kNegative;
  if (token.empty() || token == "u" || token == "unknown") return kUnknownLabel;
  throw Error(ErrorKind::kValue, "bad label token '" + std::string(token) + "'");
}

std::pair<std::size_t, std::size_t> Manifest::ClassCounts() const {
  std::size_t neg = 0, pos = 0;
  for (const auto& r : rows) {
    if (r.label == kNegative) ++neg;
    if (r.label == kPositive) ++pos;
  }
  return {neg, pos};
}

bool Manifest::HasFolds() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(),
                     [](const ManifestRow& r) { return r.fold.has_value(); });
}

Manifest ParseManifest(std::string_view text) {
  auto lines = csv::Lines(text);
  if (lines.empty()) throw Error(ErrorKind::kSchema, "manifest has no header");
  const auto header = csv::SplitLine(lines[0]);
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(header[i])] = i;
  for (const char* name : {"clip_id", "audio_path", "label", "gender", "fold"}) {
    if (!col.contains(name)) {
      throw Error(ErrorKind::kSchema,
                  std::string("manifest is missing column '") + name + "'");
    }
  }

  Manifest manifest;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i] == "\r") continue;
    const auto fields = csv::SplitLine(lines[i]);
    const std::string where = "manifest line " + std::to_string(i + 1);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kSchema, where + ": expected " +
                                          std::to_string(header.size()) +
                                          " fields");
    }
    ManifestRow row;
    row.clip_id = std::string(fields[col["clip_id"]]);
    row.audio_path = std::string(fields[col["audio_path"]]);
    if (row.clip_id.empty()) throw Error(ErrorKind::kValue, where + ": empty clip_id");
    if (row.audio_path.empty()) {
      throw Error(ErrorKind::kValue, where + ": empty audio_path");
    }
    try {
      row.label = ParseLabel(fields[col["label"]]);
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    row.gender = dsp::ParseGender(fields[col["gender"]]);
    const std::string_view fold = fields[col["fold"]];
    if (!fold.empty()) {
      int value = 0;
      auto [ptr, ec] = std::from_chars(fold.data(), fold.data() + fold.size(), value);
      if (ec != std::errc() || ptr != fold.data() + fold.size() || value < 0) {
        throw Error(ErrorKind::kValue, where + ": bad fold '" + std::string(fold) + "'");
      }
      row.fold = value;
    }
    if (!seen.insert(row.clip_id).second) {
      throw Error(ErrorKind::kValue, where + ": duplicate clip_id '" + row.clip_id + "'");
    }
    manifest.rows.push_back(std::move(row));
  }
  return manifest;
}

Manifest LoadManifest(const fs::path& path) {
  try {
    return ParseManifest(csv::ReadFile(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::size_t FeatureSchema::dim() const {
  std::size_t d = 0;
  for (const auto& b : blocks) d = std::max(d, b.offset + b.width);
  return d;
}

const FeatureBlock* FeatureSchema::Find(std::string_view name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::vector<std::string> FeatureSchema::ColumnNames() const {
  std::vector<std::string> names;
  names.reserve(dim());
  for (const auto& b : blocks) {
    if (b.width == 1) {
      names.push_back(b.name);
      continue;
    }
    for (std::size_t i = 0; i < b.width; ++i) {
      names.push_back(b.name + "_" + std::to_string(i));
    }
  }
  return names;
}

json FeatureSchema::ToJson() const {
  json blocks_json = json::array();
  for (const auto& b : blocks) {
    blocks_json.push_back({{"name", b.name}, {"offset", b.offset}, {"width", b.width}});
  }
  return {{"dim", dim()},
          {"embedding_model", embedding_model.empty() ? json(nullptr) : json(embedding_model)},
          {"blocks", blocks_json}};
}

FeatureSchema FeatureSchema::FromJson(const json& doc) {
  FeatureSchema s;
  try {
    if (doc.contains("embedding_model") && doc["embedding_model"].is_string()) {
      s.embedding_model = doc["embedding_model"].get<std::string>();
    }
    std::size_t expected_offset = 0;
    for (const auto& b : doc.at("blocks")) {
      FeatureBlock block{b.at("name").get<std::string>(), b.at("offset").get<std::size_t>(),
                         b.at("width").get<std::size_t>()};
      if (block.offset != expected_offset || block.width == 0) {
        throw Error(ErrorKind::kSchema, "schema blocks are not contiguous");
      }
      expected_offset += block.width;
      s.blocks.push_back(std::move(block));
    }
    if (doc.contains("dim") && doc["dim"].get<std::size_t>() != s.dim()) {
      throw Error(ErrorKind::kSchema, "schema dim disagrees with its blocks");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("bad schema JSON: ") + e.what());
  }
  return s;
}

FeatureSchema MakeSchema(const std::string& embedding_model,
                         std::size_t embedding_dim) {
  FeatureSchema s;
  s.blocks = {{"mfcc", dsp::kMfccOffset, dsp::kNumMfcc},
              {"chroma", dsp::kChromaOffset, dsp::kNumChroma},
              {"mel", dsp::kMelOffset, dsp::kNumMelBands},
              {"zcr", dsp::kZcrIndex, 1},
              {"gender", dsp::kGenderIndex, 1},
              {"duration", dsp::kDurationIndex, 1}};
  if (!embedding_model.empty()) {
    if (embedding_dim == 0) throw Error(ErrorKind::kSchema, "embedding dim must be >= 1");
    s.embedding_model = embedding_model;
    s.blocks.push_back({"emb_mean", dsp::kHandcraftedDim, embedding_dim});
    s.blocks.push_back({"emb_std", dsp::kHandcraftedDim + embedding_dim, embedding_dim});
  }
  return s;
}

void LabeledDataset::Validate() const {
  if (features.rows() != labels.size() || clip_ids.size() != labels.size()) {
    throw Error(ErrorKind::kSchema, "feature, label and id counts disagree");
  }
  if (!labels.empty() && features.cols() != schema.dim()) {
    throw Error(ErrorKind::kSchema, "feature width " + std::to_string(features.cols()) +
                                        " disagrees with schema dim " +
                                        std::to_string(schema.dim()));
  }
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kSchema, "non-finite feature in row '" + clip_ids[r] + "'");
      }
    }
  }
}

bool LabeledDataset::AllLabelsKnown() const {
  return std::none_of(labels.begin(), labels.end(),
                      [](int l) { return l == kUnknownLabel; });
}

std::pair<std::size_t, std::size_t> LabeledDataset::ClassCounts() const {
  std::size_t neg = 0, pos = 0;
  for (int l : labels) {
    if (l == kNegative) ++neg;
    if (l == kPositive) ++pos;
  }
  return {neg, pos};
}

LabeledDataset LabeledDataset::Subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.schema = schema;
  out.features = Matrix(rows.size(), features.cols());
  out.labels.reserve(rows.size());
  out.clip_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
    out.clip_ids.push_back(clip_ids[rows[i]]);
  }
  return out;
}

std::vector<double> Fuse(const dsp::HandcraftedVector& handcrafted,
                         const embedding::PooledEmbedding* embedding) {
  std::vector<double> row(handcrafted.values.begin(), handcrafted.values.end());
  if (embedding) {
    row.insert(row.end(), embedding->values.begin(), embedding->values.end());
  }
  return row;
}

DatasetBuilder::DatasetBuilder(FeatureSchema schema) {
  data_.schema = std::move(schema);
  data_.features = Matrix(0, data_.schema.dim());
}

void DatasetBuilder::Add(std::string clip_id, int label,
                         const dsp::HandcraftedVector& handcrafted,
                         const std::optional<embedding::PooledEmbedding>& emb) {
  const bool embedding_mode = !data_.schema.embedding_model.empty();
  if (embedding_mode != emb.has_value()) {
    throw Error(ErrorKind::kSchema,
                "clip '" + clip_id + "': " +
                    (embedding_mode ? "missing embedding in embedding mode"
                                    : "embedding given in handcrafted-only mode"));
  }
  auto row = Fuse(handcrafted, emb ? &*emb : nullptr);
  if (row.size() != data_.schema.dim()) {
    throw Error(ErrorKind::kSchema, "clip '" + clip_id + "': fused width " +
                                        std::to_string(row.size()) + " != schema dim " +
                                        std::to_string(data_.schema.dim()));
  }
  data_.features.AppendRow(row);
  data_.labels.push_back(label);
  data_.clip_ids.push_back(std::move(clip_id));
}

LabeledDataset DatasetBuilder::Build() && { return std::move(data_); }

MinMaxScaler::MinMaxScaler(std::vector<double> mins, std::vector<double> maxs)
    : mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (mins_.size() != maxs_.size()) {
    throw Error(ErrorKind::kSchema, "scaler min/max widths differ");
  }
}

MinMaxScaler MinMaxScaler::Fit(const Matrix& train) {
  if (train.rows() == 0) throw Error(ErrorKind::kFit, "cannot fit scaler on empty data");
  std::vector<double> mins(train.row(0).begin(), train.row(0).end());
  std::vector<double> maxs = mins;
  for (std::size_t r = 1; r < train.rows(); ++r) {
    auto row = train.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      mins[j] = std::min(mins[j], row[j]);
      maxs[j] = std::max(maxs[j], row[j]);
    }
  }
  return MinMaxScaler(std::move(mins), std::move(maxs));
}

double MinMaxScaler::Transform(std::size_t j, double x) const {
  const double range = maxs_[j] - mins_[j];
  if (!(range > 0.0)) return 0.0;
  return std::clamp((x - mins_[j]) / range, 0.0, 1.0);
}

Matrix MinMaxScaler::Apply(const Matrix& x) const {
  if (x.cols() != dim() && x.rows() > 0) {
    throw Error(ErrorKind::kSchema, "scaler width " + std::to_string(dim()) +
                                        " != data width " + std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto dst = out.row(r);
    for (std::size_t j = 0; j < in.size(); ++j) dst[j] = Transform(j, in[j]);
  }
  return out;
}

LabeledDataset MinMaxScaler::Apply(const LabeledDataset& data) const {
  LabeledDataset out = data;
  out.features = Apply(data.features);
  return out;
}

fs::path SchemaPathFor(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".schema.json");
  return p;
}

void WriteFeatureCsv(const fs::path& path, const LabeledDataset& data) {
  data.Validate();
  std::string text = "clip_id";
  for (const auto& name : data.schema.ColumnNames()) text += "," + name;
  text += ",label\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    text += data.clip_ids[r];
    for (double v : data.features.row(r)) {
      text += ',';
      text += csv::FormatDouble(v);
    }
    text += ',';
    if (data.labels[r] != kUnknownLabel) text += std::to_string(data.labels[r]);
    text += '\n';
  }
  csv::WriteFile(path, text);
  csv::WriteFile(SchemaPathFor(path), data.schema.ToJson().dump(2) + "\n");
}

LabeledDataset ReadFeatureCsv(const fs::path& path) {
  const fs::path schema_path = SchemaPathFor(path);
  LabeledDataset data;
  try {
    data.schema = FeatureSchema::FromJson(json::parse(csv::ReadFile(schema_path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, schema_path.string() + ": " + e.what());
  }
  const std::string text = csv::ReadFile(path);
  const auto lines = csv::Lines(text);
  if (lines.empty()) throw Error(ErrorKind::kSchema, path.string() + ": no header");
  const auto header = csv::SplitLine(lines[0]);
  const std::size_t d = data.schema.dim();
  if (header.size() != d + 2 || header.front() != "clip_id" || header.back() != "label") {
    throw Error(ErrorKind::kSchema,
                path.string() + ": header does not match schema (expected clip_id, " +
                    std::to_string(d) + " features, label)");
  }
  data.features = Matrix(0, d);
  std::vector<double> row(d);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i] == "\r") continue;
    const auto fields = csv::SplitLine(lines[i]);
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (fields.size() != d + 2) {
      throw Error(ErrorKind::kSchema, where + ": wrong field count");
    }
    try {
      for (std::size_t j = 0; j < d; ++j) row[j] = csv::ParseDouble(fields[j + 1]);
      data.labels.push_back(ParseLabel(fields.back()));
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
    data.clip_ids.emplace_back(fields[0]);
    data.features.AppendRow(row);
  }
  data.Validate();
  return data;
}

}  // namespace coughscreen::data
