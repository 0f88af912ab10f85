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

#include "coughscreen/embedding_store.h"

#include <cmath>
#include <string>

#include "coughscreen/csv.h"
#include "coughscreen/error.h"
#include "json.hpp"

namespace coughscreen::embedding {

namespace fs = std::filesystem;
using nlohmann::json;

EmbeddingMeta LoadMeta(const fs::path& dir, const std::string& model_name) {
  const fs::path path = dir / model_name / "meta.json";
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kNotFound, "missing embedding sidecar " + path.string());
  }
  json doc;
  try {
    doc = json::parse(csv::ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
  EmbeddingMeta meta;
  if (!doc.is_object() || !doc.contains("dim") || !doc["dim"].is_number_integer() ||
      doc["dim"].get<long long>() < 1) {
    throw Error(ErrorKind::kSchema, path.string() + ": 'dim' must be a positive integer");
  }
  meta.dim = doc["dim"].get<std::size_t>();
  meta.model = doc.value("model", model_name);
  if (doc.contains("frame_hop_seconds") && doc["frame_hop_seconds"].is_number()) {
    meta.frame_hop_seconds = doc["frame_hop_seconds"].get<double>();
  }
  return meta;
}

Matrix ParseEmbeddingCsv(std::string_view text, std::size_t dim) {
  Matrix m;
  std::vector<double> row(dim);
  std::size_t line_no = 0;
  for (std::string_view line : csv::Lines(text)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = csv::SplitLine(line);
    if (fields.size() != dim) {
      throw Error(ErrorKind::kSchema,
                  "row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " columns, expected " +
                      std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = csv::ParseDouble(fields[j]);
      if (!std::isfinite(row[j])) {
        throw Error(ErrorKind::kData, "non-finite value at row " +
                                          std::to_string(line_no) + ", column " +
                                          std::to_string(j + 1));
      }
    }
    m.AppendRow(row);
  }
  if (m.rows() == 0) throw Error(ErrorKind::kData, "embedding file has no rows");
  return m;
}

namespace {
EmbeddingMatrix LoadWithMeta(const fs::path& dir, const std::string& clip_id,
                             const std::string& model_name,
                             const EmbeddingMeta& meta) {
  const fs::path path = dir / model_name / (clip_id + ".csv");
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kNotFound, "missing embedding file " + path.string());
  }
  EmbeddingMatrix out;
  out.model_name = model_name;
  out.clip_id = clip_id;
  try {
    out.values = ParseEmbeddingCsv(csv::ReadFile(path), meta.dim);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
  return out;
}
}  // namespace

EmbeddingMatrix LoadEmbedding(const fs::path& dir, const std::string& clip_id,
                              const std::string& model_name) {
  return LoadWithMeta(dir, clip_id, model_name, LoadMeta(dir, model_name));
}

PooledEmbedding Pool(const EmbeddingMatrix& matrix) {
  const Matrix& x = matrix.values;
  const std::size_t t = x.rows(), d = x.cols();
  PooledEmbedding out;
  out.values.assign(2 * d, 0.0);
  if (t == 0) return out;
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t j = 0; j < d; ++j) out.values[j] += x(r, j);
  }
  for (std::size_t j = 0; j < d; ++j) out.values[j] /= static_cast<double>(t);
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = x(r, j) - out.values[j];
      out.values[d + j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    out.values[d + j] = std::sqrt(out.values[d + j] / static_cast<double>(t));
  }
  return out;
}

EmbeddingStore::EmbeddingStore(fs::path dir, std::string model_name)
    : dir_(std::move(dir)),
      model_name_(std::move(model_name)),
      meta_(LoadMeta(dir_, model_name_)) {}

EmbeddingMatrix EmbeddingStore::Load(const std::string& clip_id) const {
  return LoadWithMeta(dir_, clip_id, model_name_, meta_);
}

void WriteMeta(const fs::path& dir, const EmbeddingMeta& meta) {
  fs::create_directories(dir / meta.model);
  json doc = {{"model", meta.model}, {"dim", meta.dim}};
  doc["frame_hop_seconds"] =
      meta.frame_hop_seconds ? json(*meta.frame_hop_seconds) : json(nullptr);
  csv::WriteFile(dir / meta.model / "meta.json", doc.dump(2) + "\n");
}

void WriteEmbedding(const fs::path& dir, const std::string& model_name,
                    const std::string& clip_id, const Matrix& values) {
  fs::create_directories(dir / model_name);
  std::string text;
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (j) text += ',';
      text += csv::FormatDouble(values(r, j));
    }
    text += '\n';
  }
  csv::WriteFile(dir / model_name / (clip_id + ".csv"), text);
}

}  // namespace coughscreen::embedding
