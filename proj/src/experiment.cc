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

#include "coughscreen/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>

#include "coughscreen/error.h"
#include "coughscreen/parallel.h"
#include "coughscreen/smote.h"

namespace coughscreen::experiment {
namespace {

void Shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

nlohmann::json ThresholdJson(double t) {
  if (std::isfinite(t)) return t;
  return nullptr;
}

}  // namespace

void ExperimentPlan::Validate() const {
  if (num_folds < 2) throw Error(ErrorKind::kValue, "num_folds must be >= 2");
  if (seeds.empty()) throw Error(ErrorKind::kValue, "at least one seed is required");
  if (!(spec_floor >= 0.0 && spec_floor <= 1.0)) {
    throw Error(ErrorKind::kValue, "spec_floor must be in [0, 1]");
  }
  if (!features.handcrafted && features.embedding_model.empty()) {
    throw Error(ErrorKind::kValue, "feature config selects no features");
  }
  if (fixed_folds) {
    std::size_t k = 0;
    NormalizeFoldIds(*fixed_folds, &k);
    if (k != num_folds) {
      throw Error(ErrorKind::kValue, "fold ids define " + std::to_string(k) +
                                         " folds but the plan asks for " +
                                         std::to_string(num_folds));
    }
  }
}

nlohmann::json ExperimentPlan::ToJson() const {
  nlohmann::json features_json = {
      {"handcrafted", features.handcrafted},
      {"embedding_model", features.embedding_model.empty()
                              ? nlohmann::json(nullptr)
                              : nlohmann::json(features.embedding_model)}};
  return {{"features", std::move(features_json)},
          {"model", models::ModelKindName(model.kind)},
          {"params", model.params},
          {"num_folds", num_folds},
          {"seeds", seeds},
          {"spec_floor", spec_floor},
          {"fold_source", fixed_folds ? "manifest" : "stratified"}};
}

std::vector<std::size_t> StratifiedFolds(std::span<const int> labels, std::size_t k,
                                         std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kStratification, "need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == data::kPositive) {
      pos.push_back(i);
    } else if (labels[i] == data::kNegative) {
      neg.push_back(i);
    } else {
      throw Error(ErrorKind::kStratification, "cannot stratify rows with unknown labels");
    }
  }
  if (pos.size() < k || neg.size() < k) {
    throw Error(ErrorKind::kStratification,
                "each class needs at least " + std::to_string(k) + " rows (have " +
                    std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) +
                    " negative)");
  }
  std::mt19937_64 rng(seed);
  Shuffle(pos, rng);
  Shuffle(neg, rng);
  std::vector<std::size_t> folds(labels.size());
  std::size_t slot = 0;
  for (std::size_t i : pos) folds[i] = slot++ % k;
  for (std::size_t i : neg) folds[i] = slot++ % k;
  return folds;
}

std::vector<std::size_t> NormalizeFoldIds(std::span<const int> ids, std::size_t* k) {
  std::map<int, std::size_t> index;
  for (int id : ids) index.emplace(id, 0);
  std::size_t next = 0;
  for (auto& [id, idx] : index) idx = next++;
  if (k) *k = index.size();
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = index.at(ids[i]);
  return out;
}

FoldSplit SplitFold(std::span<const std::size_t> folds, std::size_t f) {
  FoldSplit split;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    (folds[i] == f ? split.held_out_rows : split.train_rows).push_back(i);
  }
  return split;
}

data::MinMaxScaler FitFoldScaler(const data::LabeledDataset& data,
                                 std::span<const std::size_t> folds, std::size_t f) {
  const FoldSplit split = SplitFold(folds, f);
  return data::MinMaxScaler::Fit(data.Subset(split.train_rows));
}

CvEntry RunCell(const data::LabeledDataset& data, std::span<const std::size_t> folds,
                std::size_t fold, std::uint64_t seed, const ExperimentPlan& plan) {
  const FoldSplit split = SplitFold(folds, fold);
  const data::LabeledDataset raw_train = data.Subset(split.train_rows);
  const data::MinMaxScaler scaler = data::MinMaxScaler::Fit(raw_train);
  const data::LabeledDataset held_out = scaler.Apply(data.Subset(split.held_out_rows));

  smote::SmoteConfig smote_config;
  smote_config.rng_seed = seed;
  const data::LabeledDataset train = smote::SvmSmote(scaler.Apply(raw_train), smote_config);

  models::ModelSpec spec = plan.model;
  spec.seed = seed;
  const auto model = models::Fit(spec, train, &held_out);
  const std::vector<double> scores = models::PredictScores(*model, held_out);

  CvEntry entry;
  entry.fold = fold;
  entry.seed = seed;
  entry.auc = metrics::Auc(scores, held_out.labels);
  entry.op = metrics::SelectOperatingPoint(scores, held_out.labels, plan.spec_floor);
  return entry;
}

ExperimentReport RunCv(const data::LabeledDataset& data, const ExperimentPlan& plan) {
  const auto start = std::chrono::steady_clock::now();
  plan.Validate();
  data.Validate();
  if (!data.AllLabelsKnown()) {
    throw Error(ErrorKind::kData, "cross-validation needs a label on every row");
  }
  if (plan.fixed_folds && plan.fixed_folds->size() != data.size()) {
    throw Error(ErrorKind::kData, "fold ids do not cover every row");
  }

  // Fold assignment per seed; shared when fixed.
  std::vector<std::vector<std::size_t>> assignments;
  if (plan.fixed_folds) {
    assignments.push_back(NormalizeFoldIds(*plan.fixed_folds));
  } else {
    for (std::uint64_t s : plan.seeds) {
      assignments.push_back(StratifiedFolds(data.labels, plan.num_folds, s));
    }
  }

  const std::size_t n_seeds = plan.seeds.size();
  const std::size_t cells = plan.num_folds * n_seeds;
  std::vector<CvEntry> entries(cells);
  std::vector<std::exception_ptr> errors(cells);
  ParallelFor(cells, [&](std::size_t c) {
    const std::size_t fold = c / n_seeds;
    const std::size_t s = c % n_seeds;
    const auto& folds = plan.fixed_folds ? assignments[0] : assignments[s];
    try {
      entries[c] = RunCell(data, folds, fold, plan.seeds[s], plan);
    } catch (const Error& e) {
      errors[c] = std::make_exception_ptr(
          Error(e.kind(), "fold " + std::to_string(fold) + ", seed " +
                              std::to_string(plan.seeds[s]) + ": " + e.what()));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.plan = plan;
  report.entries = std::move(entries);
  std::vector<double> aucs;
  aucs.reserve(cells);
  for (const CvEntry& e : report.entries) aucs.push_back(e.auc);
  report.avg_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(cells);
  if (aucs.size() >= 2) report.ci = metrics::NormalConfidenceInterval(aucs);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json ReportToJson(const ExperimentReport& report, bool include_wall_clock) {
  nlohmann::json entries = nlohmann::json::array();
  for (const CvEntry& e : report.entries) {
    entries.push_back({{"fold", e.fold},
                       {"seed", e.seed},
                       {"auc", e.auc},
                       {"sensitivity", e.op.sensitivity},
                       {"specificity", e.op.specificity},
                       {"precision", e.op.precision},
                       {"f1", e.op.f1},
                       {"threshold", ThresholdJson(e.op.threshold)}});
  }
  nlohmann::json out = {{"plan", report.plan.ToJson()},
                        {"entries", std::move(entries)},
                        {"avg_auc", report.avg_auc},
                        {"ci_low", report.ci ? nlohmann::json(report.ci->low) : nullptr},
                        {"ci_high", report.ci ? nlohmann::json(report.ci->high) : nullptr}};
  if (include_wall_clock) out["wall_clock_seconds"] = report.wall_clock_seconds;
  return out;
}

}  // namespace coughscreen::experiment
