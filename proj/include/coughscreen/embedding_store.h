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

// Precomputed deep-embedding ingestion. Embeddings are produced by an
// external exporter into one directory per model:
//
//   <dir>/<model>/meta.json     {"model": str, "dim": int, "frame_hop_seconds": num|null}
//   <dir>/<model>/<clip_id>.csv T rows x dim comma-separated floats, no header
//
// and pooled here into fixed-length mean || std vectors.

#ifndef COUGHSCREEN_EMBEDDING_STORE_H_
#define COUGHSCREEN_EMBEDDING_STORE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coughscreen/matrix.h"

namespace coughscreen::embedding {

struct EmbeddingMeta {
  std::string model;
  std::size_t dim = 0;
  std::optional<double> frame_hop_seconds;
};

struct EmbeddingMatrix {
  Matrix values;  // T frames x D dims
  std::string model_name;
  std::string clip_id;
};

struct PooledEmbedding {
  std::vector<double> values;  // mean block (D) followed by std block (D)

  std::size_t dim() const { return values.size() / 2; }
};

EmbeddingMeta LoadMeta(const std::filesystem::path& dir,
                       const std::string& model_name);

// Parses one clip file against a declared width.
Matrix ParseEmbeddingCsv(std::string_view text, std::size_t dim);

EmbeddingMatrix LoadEmbedding(const std::filesystem::path& dir,
                              const std::string& clip_id,
                              const std::string& model_name);

// Element-wise mean over rows, then element-wise population standard
// deviation over rows.
PooledEmbedding Pool(const EmbeddingMatrix& matrix);

// Reads meta.json once and serves clips of one model.
class EmbeddingStore {
 public:
  EmbeddingStore(std::filesystem::path dir, std::string model_name);

  const EmbeddingMeta& meta() const { return meta_; }
  EmbeddingMatrix Load(const std::string& clip_id) const;

 private:
  std::filesystem::path dir_;
  std::string model_name_;
  EmbeddingMeta meta_;
};

// Writes the interchange format. Used by fixtures and tests.
void WriteMeta(const std::filesystem::path& dir, const EmbeddingMeta& meta);
void WriteEmbedding(const std::filesystem::path& dir,
                    const std::string& model_name, const std::string& clip_id,
                    const Matrix& values);

}  // namespace coughscreen::embedding

#endif  // COUGHSCREEN_EMBEDDING_STORE_H_
