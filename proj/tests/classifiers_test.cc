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

#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <limits>

#include "coughscreen/error.h"
#include "coughscreen/gbm.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace coughscreen::models {
namespace {

using coughscreen::testing::MakeDataset;
using coughscreen::testing::SeparableDataset;
using coughscreen::testing::TempDir;

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kUsage;
}

ModelSpec QuickSpec(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGbm: return ModelSpec::Make(kind, {{"num_iterations", 40}}, 1);
    case ModelKind::kMlp:
      return ModelSpec::Make(kind, {{"hidden_layers", {8, 4}}, {"max_epochs", 15}}, 1);
    case ModelKind::kRandomForest:
    case ModelKind::kExtraTrees: return ModelSpec::Make(kind, {{"n_estimators", 10}}, 1);
    default: return ModelSpec::Make(kind, {}, 1);
  }
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind k : {ModelKind::kGbm, ModelKind::kSvm, ModelKind::kRandomForest,
                      ModelKind::kExtraTrees, ModelKind::kMlp}) {
    EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  }
  EXPECT_EQ(KindOf([] { ParseModelKind("xgboost"); }), ErrorKind::kValue);
}

TEST(ModelSpec, DefaultsAndOverrides) {
  ModelSpec gbm = ModelSpec::Make(ModelKind::kGbm);
  EXPECT_EQ(gbm.params["learning_rate"], 0.03);
  EXPECT_EQ(gbm.params["num_iterations"], 10000);
  EXPECT_EQ(gbm.params["subsample"], 0.68);
  EXPECT_EQ(gbm.params["subsample_freq"], 1);
  EXPECT_EQ(gbm.params["colsample_bytree"], 0.28);
  EXPECT_EQ(gbm.params["early_stopping_rounds"], 100);
  EXPECT_EQ(gbm.params["objective"], "binary");
  EXPECT_EQ(gbm.params["metric"], "auc");

  ModelSpec svm = ModelSpec::Make(ModelKind::kSvm, {{"gamma", 0.25}});
  EXPECT_EQ(svm.params["c"], 1.0);
  EXPECT_EQ(svm.params["gamma"], 0.25);
  EXPECT_EQ(ModelSpec::Make(ModelKind::kSvm).params["gamma"], "scale");

  ModelSpec rf = ModelSpec::Make(ModelKind::kRandomForest);
  EXPECT_EQ(rf.params["max_depth"], 20);
  EXPECT_EQ(rf.params["n_estimators"], 100);
}

TEST(ModelSpec, RejectsUnknownAndInvalid) {
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kGbm, {{"depth", 3}}); }), ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kGbm, {{"learning_rate", "fast"}}); }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kGbm, {{"learning_rate", -1}}); }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kSvm, {{"gamma", "auto"}}); }), ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kMlp, {{"hidden_layers", {}}}); }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kExtraTrees, {{"max_depth", 0}}); }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ModelSpec::Make(ModelKind::kGbm, nlohmann::json::array()); }),
            ErrorKind::kValue);
}

class AllKinds : public ::testing::TestWithParam<ModelKind> {};

TEST_P(AllKinds, ArchiveRoundTripIsBitExact) {
  auto d = SeparableDataset(60, 4, 0.1, 61);
  auto valid = SeparableDataset(20, 4, 0.1, 62);
  auto model = Fit(QuickSpec(GetParam()), d, &valid);
  TempDir dir;
  WriteArchive(dir / "m.bin", ToArchive(*model));
  auto back = FromArchive(ReadArchive(dir / "m.bin"));
  EXPECT_EQ(back->kind(), GetParam());
  EXPECT_EQ(back->dim(), 4u);
  EXPECT_EQ(PredictScores(*back, valid), PredictScores(*model, valid));
}

TEST_P(AllKinds, DeterministicAndFinite) {
  auto d = SeparableDataset(50, 3, 0.0, 63);
  auto a = Fit(QuickSpec(GetParam()), d);
  auto b = Fit(QuickSpec(GetParam()), d);
  const auto sa = PredictScores(*a, d);
  EXPECT_EQ(sa, PredictScores(*b, d));
  for (double s : sa) EXPECT_TRUE(std::isfinite(s));
  if (GetParam() != ModelKind::kSvm) {
    for (double s : sa) EXPECT_TRUE(s >= 0.0 && s <= 1.0);
  }
  EXPECT_TRUE(a->Metadata().is_object());
}

TEST_P(AllKinds, PredictContract) {
  auto d = SeparableDataset(40, 3, 0.2, 64);
  auto m = Fit(QuickSpec(GetParam()), d);
  auto wide = SeparableDataset(5, 4, 0.2, 65);
  EXPECT_EQ(KindOf([&] { PredictScores(*m, wide); }), ErrorKind::kSchema);
  auto bad = SeparableDataset(5, 3, 0.2, 66);
  bad.features(2, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(KindOf([&] { PredictScores(*m, bad); }), ErrorKind::kSchema);
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllKinds,
                         ::testing::Values(ModelKind::kGbm, ModelKind::kSvm,
                                           ModelKind::kRandomForest, ModelKind::kExtraTrees,
                                           ModelKind::kMlp),
                         [](const auto& info) { return std::string(ModelKindName(info.param)); });

TEST(PredictScores, EmptyDataGivesEmptyScores) {
  auto d = SeparableDataset(40, 3, 0.2, 67);
  auto m = Fit(QuickSpec(ModelKind::kGbm), d);
  data::LabeledDataset empty;
  empty.features = Matrix(0, 3);
  empty.schema.blocks = {{"x", 0, 3}};
  EXPECT_TRUE(PredictScores(*m, empty).empty());
}

TEST(Fit, SvmNeedsBothClasses) {
  auto d = MakeDataset({{0.1}, {0.2}, {0.3}}, {1, 1, 1});
  EXPECT_EQ(KindOf([&] { Fit(ModelSpec::Make(ModelKind::kSvm), d); }), ErrorKind::kFit);
  EXPECT_EQ(KindOf([&] { Fit(ModelSpec::Make(ModelKind::kGbm), MakeDataset({}, {})); }),
            ErrorKind::kFit);
}

TEST(Archive, RejectsCorruptFiles) {
  TempDir dir;
  auto d = SeparableDataset(40, 3, 0.2, 68);
  WriteArchive(dir / "m.bin", ToArchive(*Fit(QuickSpec(ModelKind::kGbm), d)));
  std::ifstream in(dir / "m.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});

  std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_EQ(KindOf([&] { ReadArchive(dir / "short.bin"); }), ErrorKind::kSchema);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::ofstream(dir / "magic.bin", std::ios::binary) << bad_magic;
  EXPECT_EQ(KindOf([&] { ReadArchive(dir / "magic.bin"); }), ErrorKind::kSchema);

  std::string bad_version = bytes;
  bad_version[8] = 9;
  std::ofstream(dir / "version.bin", std::ios::binary) << bad_version;
  EXPECT_EQ(KindOf([&] { ReadArchive(dir / "version.bin"); }), ErrorKind::kSchema);

  EXPECT_EQ(KindOf([&] { ReadArchive(dir / "absent.bin"); }), ErrorKind::kNotFound);

  ModelArchive wrong_kind;
  wrong_kind.header = {{"kind", "perceptron"}};
  EXPECT_EQ(KindOf([&] { FromArchive(wrong_kind); }), ErrorKind::kSchema);
  ModelArchive missing;
  missing.header = {{"kind", "gbm"}};
  EXPECT_EQ(KindOf([&] { FromArchive(missing); }), ErrorKind::kSchema);
}

}  // namespace
}  // namespace coughscreen::models
