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

#include "coughscreen/classifiers.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "coughscreen/error.h"
#include "coughscreen/forest.h"
#include "coughscreen/gbm.h"
#include "coughscreen/mlp.h"
#include "coughscreen/svm.h"
#include "param_util.h"

namespace coughscreen::models {
namespace {

constexpr char kMagic[8] = {'C', 'S', 'M', 'O', 'D', 'E', 'L', '\0'};
constexpr std::uint32_t kArchiveVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "archive blobs are written in native little-endian order");

nlohmann::json SvmDefaults() { return {{"c", 1.0}, {"gamma", "scale"}, {"tolerance", 1e-3}}; }

SvmParams SvmParamsFromJson(const nlohmann::json& p) {
  SvmParams s;
  s.c = internal::GetReal(p, "c");
  s.tolerance = internal::GetReal(p, "tolerance");
  const auto& g = p.at("gamma");
  if (g.is_string()) {
    internal::Require(g.get<std::string>() == "scale", "svm gamma must be 'scale' or a number");
  } else {
    s.gamma = internal::GetReal(p, "gamma");
    internal::Require(*s.gamma > 0, "svm gamma must be > 0");
  }
  internal::Require(s.c > 0, "svm c must be > 0");
  internal::Require(s.tolerance > 0, "svm tolerance must be > 0");
  return s;
}

nlohmann::json Defaults(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGbm: return GbmParams{}.ToJson();
    case ModelKind::kSvm: return SvmDefaults();
    case ModelKind::kRandomForest: return ForestParams::RandomForestDefaults().ToJson();
    case ModelKind::kExtraTrees: return ForestParams::ExtraTreesDefaults().ToJson();
    case ModelKind::kMlp: return MlpParams{}.ToJson();
  }
  throw Error(ErrorKind::kValue, "unknown model kind");
}

// Parses params for the kind; throws on invalid values.
void Validate(ModelKind kind, const nlohmann::json& p) {
  switch (kind) {
    case ModelKind::kGbm: GbmParams::FromJson(p); return;
    case ModelKind::kSvm: SvmParamsFromJson(p); return;
    case ModelKind::kRandomForest:
      ForestParams::FromJson(p, ForestParams::RandomForestDefaults());
      return;
    case ModelKind::kExtraTrees:
      ForestParams::FromJson(p, ForestParams::ExtraTreesDefaults());
      return;
    case ModelKind::kMlp: MlpParams::FromJson(p); return;
  }
}

class SvmClassifier final : public TrainedModel {
 public:
  SvmClassifier(nlohmann::json params, SvmModel model)
      : params_(std::move(params)), model_(std::move(model)) {}

  ModelKind kind() const override { return ModelKind::kSvm; }
  std::size_t dim() const override { return model_.support_vectors.cols(); }
  double Score(std::span<const double> x) const override { return model_.Decision(x); }

  nlohmann::json Metadata() const override {
    return {{"iterations", model_.iterations},
            {"converged", model_.converged},
            {"support_vectors", model_.support_vectors.rows()}};
  }

  void Store(ModelArchive& archive) const override {
    archive.header["params"] = params_;
    archive.header["metadata"] = Metadata();
    archive.header["rho"] = model_.rho;
    archive.header["gamma"] = model_.gamma;
    archive.header["support_indices"] = model_.support_indices;
    archive.blobs.push_back(model_.support_vectors.data());
    archive.blobs.push_back(model_.dual_coef);
  }

  static std::unique_ptr<SvmClassifier> Load(const ModelArchive& archive) {
    const auto& h = archive.header;
    SvmParamsFromJson(h.at("params"));
    const auto dim = h.at("dim").get<std::size_t>();
    if (archive.blobs.size() != 2 || dim == 0) {
      throw Error(ErrorKind::kSchema, "svm archive must hold two blobs");
    }
    SvmModel m;
    m.dual_coef = archive.blobs[1];
    const std::vector<double>& sv = archive.blobs[0];
    if (sv.size() != m.dual_coef.size() * dim) {
      throw Error(ErrorKind::kSchema, "svm archive support vector size mismatch");
    }
    m.support_vectors = Matrix(m.dual_coef.size(), dim);
    std::copy(sv.begin(), sv.end(), m.support_vectors.data().begin());
    m.rho = h.at("rho").get<double>();
    m.gamma = h.at("gamma").get<double>();
    m.support_indices = h.at("support_indices").get<std::vector<std::size_t>>();
    const auto& meta = h.at("metadata");
    m.iterations = meta.at("iterations").get<std::size_t>();
    m.converged = meta.at("converged").get<bool>();
    return std::make_unique<SvmClassifier>(h.at("params"), std::move(m));
  }

 private:
  nlohmann::json params_;
  SvmModel model_;
};

template <typename T>
void WritePod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::ifstream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorKind::kSchema, "truncated model archive");
  }
  return value;
}

}  // namespace

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGbm: return "gbm";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kExtraTrees: return "extra_trees";
    case ModelKind::kMlp: return "mlp";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  for (ModelKind k : {ModelKind::kGbm, ModelKind::kSvm, ModelKind::kRandomForest,
                      ModelKind::kExtraTrees, ModelKind::kMlp}) {
    if (name == ModelKindName(k)) return k;
  }
  throw Error(ErrorKind::kValue, "unknown model kind '" + std::string(name) +
                                     "' (expected gbm, svm, random_forest, extra_trees or mlp)");
}

ModelSpec ModelSpec::Make(ModelKind kind, const nlohmann::json& overrides, std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.params = Defaults(kind);
  if (!overrides.is_null()) {
    if (!overrides.is_object()) {
      throw Error(ErrorKind::kValue, "model parameters must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
      if (!spec.params.contains(key)) {
        throw Error(ErrorKind::kValue, "unknown " + std::string(ModelKindName(kind)) +
                                           " parameter '" + key + "'");
      }
      spec.params[key] = value;
    }
  }
  try {
    Validate(kind, spec.params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValue, std::string("invalid model parameters: ") + e.what());
  }
  return spec;
}

std::unique_ptr<TrainedModel> Fit(const ModelSpec& spec, const data::LabeledDataset& train,
                                  const data::LabeledDataset* valid) {
  train.Validate();
  if (train.size() == 0) throw Error(ErrorKind::kFit, "cannot fit on an empty training set");
  if (!train.AllLabelsKnown()) throw Error(ErrorKind::kFit, "training labels must be known");
  switch (spec.kind) {
    case ModelKind::kGbm:
      return FitGbm(train, valid, GbmParams::FromJson(spec.params), spec.seed);
    case ModelKind::kSvm: {
      SvmParams p = SvmParamsFromJson(spec.params);
      return std::make_unique<SvmClassifier>(spec.params,
                                             FitSvm(train.features, train.labels, p));
    }
    case ModelKind::kRandomForest:
      return FitForest(spec.kind, train,
                       ForestParams::FromJson(spec.params, ForestParams::RandomForestDefaults()),
                       spec.seed);
    case ModelKind::kExtraTrees:
      return FitForest(spec.kind, train,
                       ForestParams::FromJson(spec.params, ForestParams::ExtraTreesDefaults()),
                       spec.seed);
    case ModelKind::kMlp:
      return FitMlp(train, MlpParams::FromJson(spec.params), spec.seed);
  }
  throw Error(ErrorKind::kValue, "unknown model kind");
}

std::vector<double> PredictScores(const TrainedModel& model, const data::LabeledDataset& data) {
  if (data.dim() != model.dim()) {
    throw Error(ErrorKind::kSchema, "feature width " + std::to_string(data.dim()) +
                                        " does not match model width " +
                                        std::to_string(model.dim()));
  }
  std::vector<double> scores(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    auto row = data.features.row(r);
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kSchema, "non-finite feature in row '" + data.clip_ids[r] + "'");
      }
    }
    scores[r] = model.Score(row);
  }
  return scores;
}

ModelArchive ToArchive(const TrainedModel& model) {
  ModelArchive archive;
  archive.header = nlohmann::json::object();
  model.Store(archive);
  archive.header["kind"] = ModelKindName(model.kind());
  archive.header["dim"] = model.dim();
  return archive;
}

std::unique_ptr<TrainedModel> FromArchive(const ModelArchive& archive) {
  try {
    const ModelKind kind = ParseModelKind(archive.header.at("kind").get<std::string>());
    switch (kind) {
      case ModelKind::kGbm: return GbmModel::Load(archive);
      case ModelKind::kSvm: return SvmClassifier::Load(archive);
      case ModelKind::kRandomForest:
      case ModelKind::kExtraTrees: return ForestModel::Load(archive);
      case ModelKind::kMlp: return MlpModel::Load(archive);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed model archive: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kValue) throw Error(ErrorKind::kSchema, e.what());
    throw;
  }
  throw Error(ErrorKind::kSchema, "unknown model kind in archive");
}

void WriteArchive(const std::filesystem::path& path, const ModelArchive& archive) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kNotFound, "cannot write " + path.string());
  const std::vector<std::uint8_t> header = nlohmann::json::to_cbor(archive.header);
  out.write(kMagic, sizeof(kMagic));
  WritePod<std::uint32_t>(out, kArchiveVersion);
  WritePod<std::uint64_t>(out, header.size());
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  WritePod<std::uint64_t>(out, archive.blobs.size());
  for (const auto& blob : archive.blobs) {
    WritePod<std::uint64_t>(out, blob.size());
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::kData, "failed writing " + path.string());
}

ModelArchive ReadArchive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kNotFound, "model file not found: " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kSchema, path.string() + " is not a model archive");
  }
  const auto version = ReadPod<std::uint32_t>(in);
  if (version != kArchiveVersion) {
    throw Error(ErrorKind::kSchema, "unsupported model archive version " + std::to_string(version));
  }
  // Lengths are bounded by the remaining file size before allocating.
  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - start);
  in.seekg(start);

  const auto header_len = ReadPod<std::uint64_t>(in);
  if (header_len > remaining) throw Error(ErrorKind::kSchema, "truncated model archive");
  std::vector<std::uint8_t> header(header_len);
  if (!in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(header_len))) {
    throw Error(ErrorKind::kSchema, "truncated model archive");
  }
  ModelArchive archive;
  try {
    archive.header = nlohmann::json::from_cbor(header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("corrupt archive header: ") + e.what());
  }
  const auto count = ReadPod<std::uint64_t>(in);
  if (count > remaining / sizeof(std::uint64_t)) {
    throw Error(ErrorKind::kSchema, "truncated model archive");
  }
  archive.blobs.resize(count);
  for (auto& blob : archive.blobs) {
    const auto n = ReadPod<std::uint64_t>(in);
    if (n > remaining / sizeof(double)) throw Error(ErrorKind::kSchema, "truncated model archive");
    blob.resize(n);
    if (!in.read(reinterpret_cast<char*>(blob.data()),
                 static_cast<std::streamsize>(n * sizeof(double)))) {
      throw Error(ErrorKind::kSchema, "truncated model archive");
    }
  }
  return archive;
}

}  // namespace coughscreen::models
