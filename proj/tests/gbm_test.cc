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

#include "coughscreen/gbm.h"

#include <gtest/gtest.h>

#include "coughscreen/error.h"
#include "coughscreen/metrics.h"
#include "support/fixtures.h"

namespace coughscreen::models {
namespace {

using coughscreen::testing::MakeDataset;
using coughscreen::testing::SeparableDataset;

std::vector<double> ScoresOf(const TrainedModel& m, const data::LabeledDataset& d) {
  return PredictScores(m, d);
}

TEST(Gbm, SeparableReachesPerfectTrainingAuc) {
  auto d = SeparableDataset(100, 2, 0.2, 31);
  GbmParams p;
  p.num_iterations = 200;
  auto m = FitGbm(d, nullptr, p, 0);
  EXPECT_LE(m->iterations_run(), 200);
  EXPECT_EQ(metrics::Auc(ScoresOf(*m, d), d.labels), 1.0);

  // Every positive above every negative.
  const auto s = ScoresOf(*m, d);
  double min_pos = 1, max_neg = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i]) {
      min_pos = std::min(min_pos, s[i]);
    } else {
      max_neg = std::max(max_neg, s[i]);
    }
  }
  EXPECT_GT(min_pos, max_neg);
}

TEST(Gbm, ConstantFeatureGivesPrior) {
  std::vector<std::vector<double>> rows(60, std::vector<double>{0.5});
  std::vector<int> labels(60);
  for (int i = 0; i < 60; ++i) labels[i] = i % 2;
  auto d = MakeDataset(rows, labels);
  auto m = FitGbm(d, nullptr, GbmParams{}, 0);
  for (double s : ScoresOf(*m, d)) EXPECT_NEAR(s, 0.5, 0.05);
  EXPECT_EQ(m->stopping_reason(), "no_split");
}

TEST(Gbm, FlatValidationAucStopsEarly) {
  auto train = SeparableDataset(200, 3, 0.0, 32);
  // Constant validation rows: every model scores them identically.
  std::vector<std::vector<double>> rows(20, std::vector<double>{0.3, 0.3, 0.3});
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) labels[i] = i % 2;
  auto valid = MakeDataset(rows, labels);
  auto m = FitGbm(train, &valid, GbmParams{}, 0);
  EXPECT_LE(m->iterations_run(), 101);
  EXPECT_LT(m->iterations_run(), 10000);
  EXPECT_EQ(m->stopping_reason(), "early_stopping");
  EXPECT_EQ(m->best_iteration(), 1);
  EXPECT_EQ(m->trees().size(), 1u);
}

TEST(Gbm, TrainingLossNonIncreasingWithoutSubsampling) {
  auto d = SeparableDataset(150, 4, -0.2, 33);  // overlapping classes
  GbmParams p;
  p.num_iterations = 150;
  p.subsample = 1.0;
  p.colsample_bytree = 1.0;
  auto m = FitGbm(d, nullptr, p, 0);
  const auto& loss = m->train_loss();
  ASSERT_GT(loss.size(), 10u);
  for (std::size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1] + 1e-12) << i;
}

TEST(Gbm, DeterministicPerSeed) {
  auto d = SeparableDataset(120, 6, -0.1, 34);
  GbmParams p;
  p.num_iterations = 50;
  auto a = FitGbm(d, nullptr, p, 5);
  auto b = FitGbm(d, nullptr, p, 5);
  EXPECT_EQ(ScoresOf(*a, d), ScoresOf(*b, d));
  auto c = FitGbm(d, nullptr, p, 6);
  EXPECT_NE(ScoresOf(*a, d), ScoresOf(*c, d));
}

TEST(Gbm, LeafStructureRespectsLimits) {
  auto d = SeparableDataset(300, 5, -0.3, 35);
  GbmParams p;
  p.num_iterations = 20;
  p.num_leaves = 7;
  auto m = FitGbm(d, nullptr, p, 0);
  for (const Tree& t : m->trees()) EXPECT_LE(t.LeafCount(), 7u);
}

TEST(Gbm, Errors) {
  auto empty = MakeDataset({}, {});
  try {
    FitGbm(empty, nullptr, GbmParams{}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFit);
  }
  auto train = SeparableDataset(50, 3, 0.1, 36);
  auto valid = SeparableDataset(10, 2, 0.1, 37);
  try {
    FitGbm(train, &valid, GbmParams{}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
}

}  // namespace
}  // namespace coughscreen::models
