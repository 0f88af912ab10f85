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

#include <gtest/gtest.h>

#include <sstream>

#include "coughscreen/csv.h"
#include "coughscreen/dataset.h"
#include "coughscreen/embedding_store.h"
#include "json.hpp"
#include "support/oracles.h"

namespace coughscreen::cli {
namespace {

using coughscreen::testing::TempDir;

struct Result {
  int code;
  std::string out, err;
};

Result Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCommand(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    manifest_ = coughscreen::testing::WriteSyntheticCorpus(dir_->path() / "corpus", 10, 20, 5,
                                                           /*with_folds=*/true)
                    .string();
    features_ = (dir_->path() / "features.csv").string();
    const Result r = Invoke({"extract", "--manifest", manifest_, "--audio-dir",
                          (dir_->path() / "corpus").string(), "--out", features_});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  std::string Path(const std::string& name) const { return (dir_->path() / name).string(); }

  static TempDir* dir_;
  static std::string manifest_;
  static std::string features_;
};

TempDir* CliTest::dir_ = nullptr;
std::string CliTest::manifest_;
std::string CliTest::features_;

const char* kFastGbm = R"({"num_iterations": 60, "early_stopping_rounds": 20, "min_data_in_leaf": 3})";

TEST_F(CliTest, ExtractWritesFeaturesAndSchema) {
  data::LabeledDataset d = data::ReadFeatureCsv(features_);
  EXPECT_EQ(d.size(), 30u);
  EXPECT_EQ(d.dim(), 207u);
  EXPECT_EQ(d.ClassCounts(), (std::pair<std::size_t, std::size_t>{20, 10}));
  EXPECT_TRUE(std::filesystem::exists(data::SchemaPathFor(features_)));
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_GT(d.features(i, 206), 0.79);  // duration in seconds
    EXPECT_LT(d.features(i, 206), 1.21);
  }
}

TEST_F(CliTest, ExtractMissingAudioNamesTheClip) {
  std::string text = csv::ReadFile(manifest_);
  const auto pos = text.find("audio/clip_0004.wav");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 19, "audio/gone_0004.wav");
  csv::WriteFile(Path("broken.csv"), text);
  const Result r = Invoke({"extract", "--manifest", Path("broken.csv"), "--audio-dir",
                        Path("corpus"), "--out", Path("never.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("clip_0004"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(Path("never.csv")));
}

TEST_F(CliTest, ExtractWithEmbeddings) {
  const data::Manifest m = data::LoadManifest(manifest_);
  embedding::WriteMeta(Path("emb"), {"trill", 3, 0.5});
  for (const auto& row : m.rows) {
    Matrix values(2, 3, 0.25);
    values(1, 2) = row.label == 1 ? 1.0 : -1.0;
    embedding::WriteEmbedding(Path("emb"), "trill", row.clip_id, values);
  }
  const Result r = Invoke({"extract", "--manifest", manifest_, "--audio-dir", Path("corpus"),
                        "--embeddings-dir", Path("emb"), "--embedding-model", "trill", "--out",
                        Path("fused.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  data::LabeledDataset d = data::ReadFeatureCsv(Path("fused.csv"));
  EXPECT_EQ(d.dim(), 207u + 6);
  EXPECT_EQ(d.schema.embedding_model, "trill");

  // A clip without an embedding file fails with its id.
  std::filesystem::remove(Path("emb") + "/trill/" + m.rows[3].clip_id + ".csv");
  const Result bad = Invoke({"extract", "--manifest", manifest_, "--audio-dir", Path("corpus"),
                          "--embeddings-dir", Path("emb"), "--embedding-model", "trill",
                          "--out", Path("fused2.csv")});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find(m.rows[3].clip_id), std::string::npos);
}

TEST_F(CliTest, CvWritesReport) {
  csv::WriteFile(Path("fast.json"), kFastGbm);
  const Result r = Invoke({"cv", "--features", features_, "--model", "gbm", "--params",
                        Path("fast.json"), "--seeds", "0-1", "--report", Path("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto report = nlohmann::json::parse(csv::ReadFile(Path("report.json")));
  EXPECT_EQ(report["entries"].size(), 10u);
  EXPECT_EQ(report["plan"]["model"], "gbm");
  EXPECT_EQ(report["plan"]["params"]["num_iterations"], 60);
  EXPECT_GE(report["avg_auc"].get<double>(), 0.9);
}

TEST_F(CliTest, CvIsReproducible) {
  csv::WriteFile(Path("fast.json"), kFastGbm);
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(Invoke({"cv", "--features", features_, "--model", "gbm", "--params", Path("fast.json"),
                   "--seeds", "3", "--report", Path(name)})
                  .code,
              0);
  }
  auto a = nlohmann::json::parse(csv::ReadFile(Path("a.json")));
  auto b = nlohmann::json::parse(csv::ReadFile(Path("b.json")));
  a.erase("wall_clock_seconds");
  b.erase("wall_clock_seconds");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST_F(CliTest, CvWithManifestFolds) {
  const Result r = Invoke({"cv", "--features", features_, "--model", "random_forest", "--seeds", "0",
                        "--manifest", manifest_, "--report", Path("mf.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(csv::ReadFile(Path("mf.json")));
  EXPECT_EQ(report["plan"]["fold_source"], "manifest");
  EXPECT_EQ(report["entries"].size(), 5u);
}

TEST_F(CliTest, ConfigFileOverridesFlags) {
  csv::WriteFile(Path("config.json"), R"({"folds": 3, "seeds": "0", "model": "extra_trees"})");
  const Result r = Invoke({"cv", "--features", features_, "--model", "gbm", "--folds", "5",
                        "--config", Path("config.json"), "--report", Path("cfg.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(csv::ReadFile(Path("cfg.json")));
  EXPECT_EQ(report["entries"].size(), 3u);
  EXPECT_EQ(report["plan"]["model"], "extra_trees");

  csv::WriteFile(Path("bad_config.json"), R"({"fold": 3})");
  EXPECT_EQ(Invoke({"cv", "--features", features_, "--model", "gbm", "--config",
                 Path("bad_config.json"), "--report", Path("x.json")})
                .code,
            2);
}

TEST_F(CliTest, TrainPredictEval) {
  csv::WriteFile(Path("fast.json"), kFastGbm);
  Result r = Invoke({"train", "--features", features_, "--model", "gbm", "--params",
                  Path("fast.json"), "--seed", "2", "--out", Path("model.bin")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = Invoke({"predict", "--model", Path("model.bin"), "--features", features_, "--out",
           Path("scores.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string scores = csv::ReadFile(Path("scores.csv"));
  const auto lines = csv::Lines(scores);
  ASSERT_EQ(lines.size(), 31u);
  EXPECT_EQ(lines[0], "clip_id,score");

  r = Invoke({"eval", "--scores", Path("scores.csv"), "--manifest", manifest_});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("auc "), std::string::npos);
  EXPECT_NE(r.out.find("specificity "), std::string::npos);
  EXPECT_NE(r.out.find("f1 "), std::string::npos);

  // Predicting with features of another width is a schema error.
  r = Invoke({"predict", "--model", Path("model.bin"), "--features", Path("fused.csv"), "--out",
           Path("scores2.csv")});
  if (std::filesystem::exists(Path("fused.csv"))) EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, EvalSingleClassIsUndefined) {
  csv::WriteFile(Path("one.csv"),
                 "clip_id,audio_path,label,gender,fold\na,a.wav,p,male,\nb,b.wav,p,female,\n");
  csv::WriteFile(Path("s.csv"), "clip_id,score\na,0.5\nb,0.7\n");
  const Result r = Invoke({"eval", "--scores", Path("s.csv"), "--manifest", Path("one.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("undefined-metric"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainingFailureExitsFour) {
  data::LabeledDataset d = data::ReadFeatureCsv(features_);
  std::vector<std::size_t> rows;
  bool kept_positive = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] == 0 || !kept_positive) {
      kept_positive |= d.labels[i] == 1;
      rows.push_back(i);
    }
  }
  data::WriteFeatureCsv(Path("lonely.csv"), d.Subset(rows));
  const Result r = Invoke({"train", "--features", Path("lonely.csv"), "--model", "gbm",
                        "--valid-fraction", "0", "--out", Path("m2.bin")});
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, 2);
  EXPECT_EQ(Invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(Invoke({"cv", "--features", "f.csv", "--model", "gbm"}).code, 2);
  EXPECT_EQ(Invoke({"cv", "--features", "f.csv", "--model", "gbm", "--report", "r.json",
                 "--bogus", "1"})
                .code,
            2);
  EXPECT_EQ(Invoke({"cv", "--features", "f.csv", "--model", "nope", "--report", "r.json"}).code, 2);
  EXPECT_EQ(Invoke({"cv", "--features", "f.csv", "--model", "gbm", "--seeds", "x", "--report",
                 "r.json"})
                .code,
            2);
  EXPECT_EQ(Invoke({"eval", "--scores", "/nonexistent.csv", "--manifest", "/nonexistent.csv"}).code,
            3);
}

TEST(Cli, HelpExitsZero) {
  const Result r = Invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("extract"), std::string::npos);
}

TEST(Cli, SeedLists) {
  EXPECT_EQ(ParseSeedList("0-9").size(), 10u);
  EXPECT_EQ(ParseSeedList("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(ParseSeedList("0-2,8"), (std::vector<std::uint64_t>{0, 1, 2, 8}));
  EXPECT_THROW(ParseSeedList(""), Error);
  EXPECT_THROW(ParseSeedList("5-1"), Error);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kSchema), 3);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kFit), 4);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kUsage), 2);
}

}  // namespace
}  // namespace coughscreen::cli
