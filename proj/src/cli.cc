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

#include "coughscreen/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "coughscreen/audio_io.h"
#include "coughscreen/classifiers.h"
#include "coughscreen/csv.h"
#include "coughscreen/dataset.h"
#include "coughscreen/dsp_features.h"
#include "coughscreen/embedding_store.h"
#include "coughscreen/experiment.h"
#include "coughscreen/metrics.h"
#include "coughscreen/parallel.h"
#include "coughscreen/smote.h"
#include "json.hpp"

namespace coughscreen::cli {
namespace {

namespace fs = std::filesystem;

struct ExtractArgs {
  std::string manifest, audio_dir, embeddings_dir, embedding_model, out;
};

struct CvArgs {
  std::string features, model, params, seeds = "0-9", manifest, report;
  std::size_t folds = 5;
  double spec_floor = 0.95;
};

struct TrainArgs {
  std::string features, model, params, out;
  double valid_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct PredictArgs {
  std::string model, features, out;
};

struct EvalArgs {
  std::string scores, manifest;
  double spec_floor = 0.95;
};

std::string Format2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

nlohmann::json LoadJsonFile(const fs::path& path, ErrorKind kind) {
  const std::string text = csv::ReadFile(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(kind, path.string() + ": invalid JSON: " + e.what());
  }
}

models::ModelSpec MakeSpec(const std::string& model, const std::string& params_path) {
  models::ModelKind kind;
  try {
    kind = models::ParseModelKind(model);
  } catch (const Error& e) {
    throw Error(ErrorKind::kUsage, e.what());
  }
  nlohmann::json overrides;
  if (!params_path.empty()) overrides = LoadJsonFile(params_path, ErrorKind::kValue);
  return models::ModelSpec::Make(kind, overrides);
}

// Writes JSON atomically enough for our purposes: whole string, one call.
void WriteJson(const fs::path& path, const nlohmann::json& doc) {
  csv::WriteFile(path, doc.dump(2) + "\n");
}

// ---- extract ---------------------------------------------------------------

int RunExtract(const ExtractArgs& a, std::ostream& err) {
  if (a.embeddings_dir.empty() != a.embedding_model.empty()) {
    throw Error(ErrorKind::kUsage, "--embeddings-dir and --embedding-model go together");
  }
  const data::Manifest manifest = data::LoadManifest(a.manifest);
  std::optional<embedding::EmbeddingStore> store;
  if (!a.embedding_model.empty()) store.emplace(a.embeddings_dir, a.embedding_model);

  std::vector<fs::path> paths;
  paths.reserve(manifest.rows.size());
  for (const auto& row : manifest.rows) {
    fs::path p(row.audio_path);
    if (p.is_relative()) p = fs::path(a.audio_dir) / p;
    if (!fs::is_regular_file(p)) {
      err << "error: clip " << row.clip_id << ": audio file not found: " << p.string() << "\n";
      return kExitData;
    }
    paths.push_back(std::move(p));
  }

  const std::size_t n = manifest.rows.size();
  std::vector<std::optional<dsp::HandcraftedVector>> handcrafted(n);
  std::vector<std::optional<embedding::PooledEmbedding>> pooled(n);
  std::vector<std::exception_ptr> errors(n);
  ParallelFor(n, [&](std::size_t i) {
    try {
      const audio::AudioClip clip =
          audio::NormalizeForPipeline(audio::DecodeWavFile(paths[i]));
      handcrafted[i] = dsp::ComputeHandcrafted(clip, manifest.rows[i].gender);
      if (store) pooled[i] = embedding::Pool(store->Load(manifest.rows[i].clip_id));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      err << "error: clip " << manifest.rows[i].clip_id << ": " << e.what() << "\n";
      return ExitCodeFor(e.kind());
    }
  }

  data::DatasetBuilder builder(
      data::MakeSchema(a.embedding_model, store ? store->meta().dim : 0));
  for (std::size_t i = 0; i < n; ++i) {
    builder.Add(manifest.rows[i].clip_id, manifest.rows[i].label, *handcrafted[i], pooled[i]);
  }
  const data::LabeledDataset dataset = std::move(builder).Build();
  data::WriteFeatureCsv(a.out, dataset);
  err << "extracted " << n << " clips x " << dataset.dim() << " features -> " << a.out << "\n";
  return kExitOk;
}

// ---- cv --------------------------------------------------------------------

std::vector<int> FoldIdsFromManifest(const data::LabeledDataset& d, const fs::path& path) {
  const data::Manifest manifest = data::LoadManifest(path);
  std::map<std::string, int> by_id;
  for (const auto& row : manifest.rows) {
    if (!row.fold) throw Error(ErrorKind::kData, "manifest row " + row.clip_id + " has no fold id");
    by_id[row.clip_id] = *row.fold;
  }
  std::vector<int> folds;
  folds.reserve(d.size());
  for (const std::string& id : d.clip_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::kData, "clip " + id + " missing from manifest");
    folds.push_back(it->second);
  }
  return folds;
}

int RunCvCommand(const CvArgs& a, std::ostream& err) {
  experiment::ExperimentPlan plan;
  plan.model = MakeSpec(a.model, a.params);
  plan.num_folds = a.folds;
  plan.seeds = ParseSeedList(a.seeds);
  plan.spec_floor = a.spec_floor;

  const data::LabeledDataset d = data::ReadFeatureCsv(a.features);
  plan.features.handcrafted = d.schema.Find("mfcc") != nullptr;
  plan.features.embedding_model = d.schema.embedding_model;
  if (!a.manifest.empty()) plan.fixed_folds = FoldIdsFromManifest(d, a.manifest);
  plan.Validate();

  err << "cv: " << d.size() << " rows, " << plan.num_folds << " folds x "
      << plan.seeds.size() << " seeds, model " << models::ModelKindName(plan.model.kind) << "\n";
  const experiment::ExperimentReport report = experiment::RunCv(d, plan);
  WriteJson(a.report, experiment::ReportToJson(report));
  err << "avg_auc " << Format2(100.0 * report.avg_auc);
  if (report.ci) err << " ci (" << report.ci->low << ", " << report.ci->high << ")";
  err << " -> " << a.report << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

// Per-class shuffled holdout of round(fraction * class size) rows.
void StratifiedHoldout(const data::LabeledDataset& d, double fraction, std::uint64_t seed,
                       std::vector<std::size_t>& train_rows,
                       std::vector<std::size_t>& valid_rows) {
  std::mt19937_64 rng(seed);
  for (int label : {data::kPositive, data::kNegative}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.labels[i] == label) rows.push_back(i);
    }
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
    const auto n_valid = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(rows.size())));
    valid_rows.insert(valid_rows.end(), rows.begin(), rows.begin() + n_valid);
    train_rows.insert(train_rows.end(), rows.begin() + n_valid, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(valid_rows.begin(), valid_rows.end());
}

int RunTrain(const TrainArgs& a, std::ostream& err) {
  if (!(a.valid_fraction >= 0.0 && a.valid_fraction < 1.0)) {
    throw Error(ErrorKind::kUsage, "--valid-fraction must be in [0, 1)");
  }
  models::ModelSpec spec = MakeSpec(a.model, a.params);
  spec.seed = a.seed;
  const data::LabeledDataset d = data::ReadFeatureCsv(a.features);
  if (!d.AllLabelsKnown()) throw Error(ErrorKind::kData, "training features need labels on every row");

  std::vector<std::size_t> train_rows, valid_rows;
  StratifiedHoldout(d, a.valid_fraction, a.seed, train_rows, valid_rows);
  const data::LabeledDataset raw_train = d.Subset(train_rows);
  const data::MinMaxScaler scaler = data::MinMaxScaler::Fit(raw_train);
  const data::LabeledDataset valid = scaler.Apply(d.Subset(valid_rows));

  smote::SmoteConfig smote_config;
  smote_config.rng_seed = a.seed;
  const data::LabeledDataset train = smote::SvmSmote(scaler.Apply(raw_train), smote_config);
  const auto model = models::Fit(spec, train, valid.size() > 0 ? &valid : nullptr);

  models::ModelArchive archive = models::ToArchive(*model);
  archive.header["schema"] = d.schema.ToJson();
  archive.header["scaler"] = {{"mins", scaler.mins()}, {"maxs", scaler.maxs()}};
  models::WriteArchive(a.out, archive);

  err << "trained " << models::ModelKindName(spec.kind) << " on " << train.size() << " rows ("
      << raw_train.size() << " before oversampling)";
  const auto [vneg, vpos] = valid.ClassCounts();
  if (vneg > 0 && vpos > 0) {
    err << ", holdout AUC " << Format2(100.0 * metrics::Auc(models::PredictScores(*model, valid),
                                                            valid.labels));
  }
  err << " -> " << a.out << "\n";
  return kExitOk;
}

// ---- predict ---------------------------------------------------------------

int RunPredict(const PredictArgs& a, std::ostream& err) {
  const models::ModelArchive archive = models::ReadArchive(a.model);
  data::FeatureSchema schema;
  data::MinMaxScaler scaler;
  try {
    schema = data::FeatureSchema::FromJson(archive.header.at("schema"));
    const auto& s = archive.header.at("scaler");
    scaler = data::MinMaxScaler(s.at("mins").get<std::vector<double>>(),
                                s.at("maxs").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("model file lacks schema/scaler: ") + e.what());
  }
  const auto model = models::FromArchive(archive);
  const data::LabeledDataset d = data::ReadFeatureCsv(a.features);
  if (!(d.schema == schema)) {
    throw Error(ErrorKind::kSchema, "feature schema of " + a.features +
                                        " differs from the one the model was trained on");
  }
  const std::vector<double> scores = models::PredictScores(*model, scaler.Apply(d));
  std::string text = "clip_id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    text += d.clip_ids[i] + "," + csv::FormatDouble(scores[i]) + "\n";
  }
  csv::WriteFile(a.out, text);
  err << "scored " << scores.size() << " clips -> " << a.out << "\n";
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

int RunEval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const data::Manifest manifest = data::LoadManifest(a.manifest);
  std::map<std::string, int> label_of;
  for (const auto& row : manifest.rows) label_of[row.clip_id] = row.label;

  const std::string text = csv::ReadFile(a.scores);
  const auto lines = csv::Lines(text);
  if (lines.empty()) throw Error(ErrorKind::kSchema, a.scores + " is empty");
  const auto header = csv::SplitLine(lines[0]);
  if (header.size() != 2 || header[0] != "clip_id" || header[1] != "score") {
    throw Error(ErrorKind::kSchema, a.scores + ": header must be clip_id,score");
  }
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t skipped = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv::SplitLine(lines[i]);
    if (fields.size() != 2) {
      throw Error(ErrorKind::kSchema, a.scores + ": line " + std::to_string(i + 1) +
                                          " has " + std::to_string(fields.size()) + " fields");
    }
    const std::string id(fields[0]);
    auto it = label_of.find(id);
    if (it == label_of.end()) throw Error(ErrorKind::kData, "clip " + id + " missing from manifest");
    const double s = csv::ParseDouble(fields[1]);
    if (!std::isfinite(s)) throw Error(ErrorKind::kData, "non-finite score for clip " + id);
    if (it->second == data::kUnknownLabel) {
      ++skipped;
      continue;
    }
    scores.push_back(s);
    labels.push_back(it->second);
  }
  if (skipped > 0) err << "warning: skipped " << skipped << " clips with unknown labels\n";

  const double auc = metrics::Auc(scores, labels);
  const metrics::OperatingPoint op = metrics::SelectOperatingPoint(scores, labels, a.spec_floor);
  out << "auc " << Format2(100.0 * auc) << "\n"
      << "threshold " << (std::isfinite(op.threshold) ? csv::FormatDouble(op.threshold) : "inf")
      << "\n"
      << "sensitivity " << Format2(op.sensitivity) << "\n"
      << "specificity " << Format2(op.specificity) << "\n"
      << "precision " << Format2(op.precision) << "\n"
      << "f1 " << Format2(op.f1) << "\n";
  return kExitOk;
}

// ---- config ----------------------------------------------------------------

// Turns `--config FILE` into trailing `--key value` pairs so that file
// values win over flags given on the command line.
std::vector<std::string> ExpandConfig(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorKind::kUsage, "--config needs a file");
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  std::vector<std::string> expanded = args;
  if (path.empty()) return expanded;

  nlohmann::json doc;
  try {
    doc = LoadJsonFile(path, ErrorKind::kUsage);
  } catch (const Error& e) {
    throw Error(ErrorKind::kUsage, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kUsage, "config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") throw Error(ErrorKind::kUsage, "config files cannot nest");
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number() || value.is_boolean()) {
      text = value.dump();
    } else {
      throw Error(ErrorKind::kUsage, "config key '" + key + "' must be a string or number");
    }
    expanded.push_back("--" + key);
    expanded.push_back(text);
  }
  return expanded;
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kFit:
    case ErrorKind::kAugmentation: return kExitTraining;
    default: return kExitData;
  }
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      throw Error(ErrorKind::kUsage, "bad seed list '" + text + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  for (std::string_view part : csv::SplitLine(text)) {
    const auto dash = part.find('-');
    if (dash == std::string_view::npos) {
      seeds.push_back(parse(part));
      continue;
    }
    const std::uint64_t lo = parse(part.substr(0, dash)), hi = parse(part.substr(dash + 1));
    if (hi < lo || hi - lo > 100000) throw Error(ErrorKind::kUsage, "bad seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw Error(ErrorKind::kUsage, "empty seed list");
  return seeds;
}

int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cough-audio screening: feature extraction, cross-validation, training, scoring.",
               "coughscreen"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config;
  const char* config_help = "JSON file whose keys mirror the flags; its values take precedence";

  ExtractArgs ex;
  CLI::App* extract = app.add_subcommand("extract", "Build the fused feature CSV and schema");
  extract->add_option("--manifest", ex.manifest, "Manifest CSV")->required();
  extract->add_option("--audio-dir", ex.audio_dir, "Directory audio paths are relative to")
      ->required();
  extract->add_option("--embeddings-dir", ex.embeddings_dir, "Embedding interchange root");
  extract->add_option("--embedding-model", ex.embedding_model, "Embedding model name");
  extract->add_option("--out", ex.out, "Output feature CSV")->required();
  extract->add_option("--config", config, config_help);

  CvArgs cv;
  CLI::App* cvc = app.add_subcommand("cv", "Stratified k-fold cross-validation over seeds");
  cvc->add_option("--features", cv.features, "Feature CSV")->required();
  cvc->add_option("--model", cv.model, "gbm | svm | random_forest | extra_trees | mlp")
      ->required();
  cvc->add_option("--params", cv.params, "JSON hyperparameter overrides");
  cvc->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
  cvc->add_option("--seeds", cv.seeds, "Seed list, e.g. 0-9 or 0,3,5")->capture_default_str();
  cvc->add_option("--spec-floor", cv.spec_floor, "Minimum specificity (fraction)")
      ->capture_default_str();
  cvc->add_option("--manifest", cv.manifest, "Manifest whose fold column fixes the folds");
  cvc->add_option("--report", cv.report, "Output report JSON")->required();
  cvc->add_option("--config", config, config_help);

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Single fit with a stratified holdout");
  train->add_option("--features", tr.features, "Feature CSV")->required();
  train->add_option("--model", tr.model, "gbm | svm | random_forest | extra_trees | mlp")
      ->required();
  train->add_option("--params", tr.params, "JSON hyperparameter overrides");
  train->add_option("--valid-fraction", tr.valid_fraction, "Holdout fraction")
      ->capture_default_str();
  train->add_option("--seed", tr.seed, "Seed for holdout, oversampling and fitting")
      ->capture_default_str();
  train->add_option("--out", tr.out, "Output model file")->required();
  train->add_option("--config", config, config_help);

  PredictArgs pr;
  CLI::App* predict = app.add_subcommand("predict", "Score clips with a trained model");
  predict->add_option("--model", pr.model, "Model file")->required();
  predict->add_option("--features", pr.features, "Feature CSV")->required();
  predict->add_option("--out", pr.out, "Output scores CSV")->required();
  predict->add_option("--config", config, config_help);

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "AUC and operating point of a scores file");
  eval->add_option("--scores", ev.scores, "Scores CSV (clip_id,score)")->required();
  eval->add_option("--manifest", ev.manifest, "Manifest with labels")->required();
  eval->add_option("--spec-floor", ev.spec_floor, "Minimum specificity (fraction)")
      ->capture_default_str();
  eval->add_option("--config", config, config_help);

  try {
    std::vector<std::string> expanded = ExpandConfig(args);
    // CLI11 consumes arguments from the back of the vector.
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  }

  try {
    if (extract->parsed()) return RunExtract(ex, err);
    if (cvc->parsed()) return RunCvCommand(cv, err);
    if (train->parsed()) return RunTrain(tr, err);
    if (predict->parsed()) return RunPredict(pr, err);
    if (eval->parsed()) return RunEval(ev, out, err);
  } catch (const Error& e) {
    err << "error (" << ErrorKindName(e.kind()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace coughscreen::cli
