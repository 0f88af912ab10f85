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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "coughscreen/csv.h"
#include "coughscreen/error.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace coughscreen::data {
namespace {

using coughscreen::testing::MakeDataset;
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

dsp::HandcraftedVector Handcrafted(double base) {
  dsp::HandcraftedVector v;
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = base + 0.01 * i;
  return v;
}

TEST(Manifest, ClassCounts) {
  std::string text = "clip_id,audio_path,label,gender,fold\n";
  for (int i = 0; i < 965; ++i) {
    text += "c" + std::to_string(i) + ",a.wav," + (i < 172 ? "p" : "n") + ",female,\n";
  }
  Manifest m = ParseManifest(text);
  ASSERT_EQ(m.rows.size(), 965u);
  EXPECT_EQ(m.ClassCounts(), (std::pair<std::size_t, std::size_t>{793, 172}));
  EXPECT_FALSE(m.HasFolds());
}

TEST(Manifest, HeaderOnlyAndColumnOrder) {
  EXPECT_TRUE(ParseManifest("clip_id,audio_path,label,gender,fold\n").rows.empty());
  Manifest m = ParseManifest("fold,gender,label,audio_path,clip_id\n3,male,n,x.wav,id7\n");
  ASSERT_EQ(m.rows.size(), 1u);
  EXPECT_EQ(m.rows[0].clip_id, "id7");
  EXPECT_EQ(m.rows[0].audio_path, "x.wav");
  EXPECT_EQ(m.rows[0].label, kNegative);
  EXPECT_EQ(m.rows[0].gender, dsp::Gender::kMale);
  EXPECT_EQ(m.rows[0].fold, 3);
  EXPECT_TRUE(m.HasFolds());
}

TEST(Manifest, Errors) {
  EXPECT_EQ(KindOf([] { ParseManifest("clip_id,audio_path,label,gender\n"); }), ErrorKind::kSchema);
  EXPECT_EQ(KindOf([] {
              ParseManifest("clip_id,audio_path,label,gender,fold\na,x.wav,p,male,\na,y.wav,n,male,\n");
            }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { ParseManifest("clip_id,audio_path,label,gender,fold\na,x.wav,maybe,male,\n"); }),
            ErrorKind::kValue);
  EXPECT_EQ(KindOf([] { LoadManifest("/nonexistent/manifest.csv"); }), ErrorKind::kNotFound);
}

TEST(Labels, Tokens) {
  EXPECT_EQ(ParseLabel("p"), kPositive);
  EXPECT_EQ(ParseLabel("positive"), kPositive);
  EXPECT_EQ(ParseLabel("1"), kPositive);
  EXPECT_EQ(ParseLabel("n"), kNegative);
  EXPECT_EQ(ParseLabel("0"), kNegative);
  EXPECT_EQ(ParseLabel(""), kUnknownLabel);
  EXPECT_EQ(ParseLabel("u"), kUnknownLabel);
}

TEST(Schema, Layout) {
  FeatureSchema hc = MakeSchema();
  EXPECT_EQ(hc.dim(), 207u);
  FeatureSchema fused = MakeSchema("wav2vec", 512);
  EXPECT_EQ(fused.dim(), 1231u);
  ASSERT_NE(fused.Find("emb_std"), nullptr);
  EXPECT_EQ(fused.Find("emb_std")->offset, 207u + 512u);
  EXPECT_EQ(fused.Find("mel")->offset, 76u);
  EXPECT_EQ(FeatureSchema::FromJson(fused.ToJson()), fused);
  const auto names = hc.ColumnNames();
  ASSERT_EQ(names.size(), 207u);
  EXPECT_EQ(names[0], "mfcc_0");
  EXPECT_EQ(names[204], "zcr");
  EXPECT_EQ(names[206], "duration");
}

TEST(Fuse, DimensionsAndMixedPresence) {
  embedding::PooledEmbedding emb{std::vector<double>(1024, 0.5)};
  EXPECT_EQ(Fuse(Handcrafted(0), nullptr).size(), 207u);
  EXPECT_EQ(Fuse(Handcrafted(0), &emb).size(), 1231u);

  DatasetBuilder with(MakeSchema("m", 512));
  with.Add("a", kPositive, Handcrafted(0), emb);
  EXPECT_EQ(KindOf([&] { with.Add("b", kNegative, Handcrafted(1), std::nullopt); }),
            ErrorKind::kSchema);
  DatasetBuilder without(MakeSchema());
  without.Add("a", kPositive, Handcrafted(0), std::nullopt);
  EXPECT_EQ(KindOf([&] { without.Add("b", kNegative, Handcrafted(1), emb); }),
            ErrorKind::kSchema);
  LabeledDataset d = std::move(without).Build();
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.dim(), 207u);
  EXPECT_EQ(d.features(0, 5), Handcrafted(0).values[5]);
}

TEST(Scaler, OwnFitSetMapsToUnitRange) {
  LabeledDataset d = MakeDataset({{1, 5, 2}, {3, 5, -1}, {2, 5, 0.5}}, {0, 1, 0});
  MinMaxScaler s = MinMaxScaler::Fit(d);
  LabeledDataset t = s.Apply(d);
  EXPECT_EQ(t.features(0, 0), 0.0);
  EXPECT_EQ(t.features(1, 0), 1.0);
  EXPECT_EQ(t.features(2, 0), 0.5);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(t.features(r, 1), 0.0);  // constant column
  EXPECT_EQ(t.features(0, 2), 1.0);
  EXPECT_EQ(t.features(1, 2), 0.0);
  // Idempotent on the fitting set.
  LabeledDataset again = MinMaxScaler::Fit(t).Apply(t);
  for (std::size_t i = 0; i < t.features.data().size(); ++i) {
    EXPECT_NEAR(again.features.data()[i], t.features.data()[i], 1e-12);
  }
}

TEST(Scaler, ClipsOutOfRangeAndKeepsOrder) {
  MinMaxScaler s({1.0}, {3.0});
  EXPECT_EQ(s.Transform(0, 2 * 3.0 - 1.0), 1.0);
  EXPECT_EQ(s.Transform(0, -10.0), 0.0);
  EXPECT_LT(s.Transform(0, 1.5), s.Transform(0, 2.5));
}

TEST(Scaler, EmptyFitIsFitError) {
  EXPECT_EQ(KindOf([] { MinMaxScaler::Fit(Matrix(0, 3)); }), ErrorKind::kFit);
}

TEST(Dataset, ValidateCatchesNonFinite) {
  LabeledDataset d = MakeDataset({{1, 2}, {3, std::numeric_limits<double>::quiet_NaN()}}, {0, 1});
  EXPECT_EQ(KindOf([&] { d.Validate(); }), ErrorKind::kSchema);
  LabeledDataset short_labels = MakeDataset({{1, 2}, {3, 4}}, {0});
  EXPECT_EQ(KindOf([&] { short_labels.Validate(); }), ErrorKind::kSchema);
}

TEST(FeatureCsv, RoundTripsExactly) {
  TempDir dir;
  DatasetBuilder b(MakeSchema("m", 2));
  b.Add("a", kPositive, Handcrafted(0.123456789012345), embedding::PooledEmbedding{{1e-300, 2, 3, 4}});
  b.Add("b", kUnknownLabel, Handcrafted(-7), embedding::PooledEmbedding{{0.1, 0.2, 0.3, 1.0 / 3}});
  LabeledDataset d = std::move(b).Build();
  WriteFeatureCsv(dir / "f.csv", d);
  EXPECT_TRUE(std::filesystem::exists(SchemaPathFor(dir / "f.csv")));
  LabeledDataset back = ReadFeatureCsv(dir / "f.csv");
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.clip_ids, d.clip_ids);
  EXPECT_EQ(back.schema, d.schema);
  const std::string text = csv::ReadFile(dir / "f.csv");
  EXPECT_EQ(text.rfind("clip_id,mfcc_0,", 0), 0u);
}

TEST(FeatureCsv, SchemaMismatchAndMissingSidecar) {
  TempDir dir;
  LabeledDataset d = MakeDataset({{1, 2}}, {1});
  d.schema = MakeSchema();
  EXPECT_EQ(KindOf([&] { WriteFeatureCsv(dir / "bad.csv", d); }), ErrorKind::kSchema);
  csv::WriteFile(dir / "orphan.csv", "clip_id,x,label\na,1,1\n");
  EXPECT_EQ(KindOf([&] { ReadFeatureCsv(dir / "orphan.csv"); }), ErrorKind::kNotFound);
}

}  // namespace
}  // namespace coughscreen::data
