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

#include "coughscreen/smote.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "coughscreen/error.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace coughscreen::smote {
namespace {

using coughscreen::testing::MakeDataset;

data::LabeledDataset RandomImbalanced(std::mt19937_64& rng, std::size_t n_major,
                                      std::size_t n_minor, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n_major + n_minor; ++i) {
    const int y = i < n_minor ? 1 : 0;
    std::vector<double> r(d);
    for (double& v : r) v = std::clamp(u(rng) * 0.7 + (y ? 0.3 : 0.0), 0.0, 1.0);
    rows.push_back(r);
    labels.push_back(y);
  }
  return MakeDataset(rows, labels);
}

TEST(SvmSmote, BalancesDevelopmentClassCounts) {
  std::mt19937_64 rng(11);
  auto d = RandomImbalanced(rng, 793, 172, 4);
  SmoteConfig config;
  auto out = SvmSmote(d, config);
  EXPECT_EQ(out.size(), 793u * 2);
  EXPECT_EQ(out.ClassCounts(), (std::pair<std::size_t, std::size_t>{793, 793}));
}

TEST(SvmSmote, BalancedInputIsIdentity) {
  auto d = MakeDataset({{0.1, 0.2}, {0.9, 0.8}, {0.2, 0.1}, {0.8, 0.7}}, {0, 1, 0, 1});
  auto out = SvmSmote(d, {});
  EXPECT_EQ(out.features, d.features);
  EXPECT_EQ(out.labels, d.labels);
  EXPECT_EQ(out.clip_ids, d.clip_ids);
}

TEST(SvmSmote, MinorityOfOneIsAnError) {
  auto d = MakeDataset({{0.1}, {0.2}, {0.3}}, {0, 0, 1});
  try {
    SvmSmote(d, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAugmentation);
  }
}

TEST(SvmSmote, MajorityPositiveIsOversampledToo) {
  std::mt19937_64 rng(12);
  auto d = RandomImbalanced(rng, 10, 30, 3);  // label 1 is the majority here
  auto out = SvmSmote(d, {});
  EXPECT_EQ(out.ClassCounts(), (std::pair<std::size_t, std::size_t>{30, 30}));
}

TEST(SvmSmote, PropertiesOnRandomDatasets) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng() % 6;
    const std::size_t minor = 2 + rng() % 15;
    const std::size_t major = minor + 1 + rng() % 60;
    auto data = RandomImbalanced(rng, major, minor, d);
    SmoteConfig config;
    config.rng_seed = trial;
    SmoteResult r = SvmSmoteDetailed(data, config);
    const auto& out = r.data;
    ASSERT_EQ(out.ClassCounts(), (std::pair<std::size_t, std::size_t>{major, major}));
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) ASSERT_EQ(out.features(i, j), data.features(i, j));
      ASSERT_EQ(out.labels[i], data.labels[i]);
    }
    ASSERT_EQ(r.origins.size(), out.size() - data.size());
    for (std::size_t s = 0; s < r.origins.size(); ++s) {
      auto row = out.features.row(data.size() + s);
      for (double v : row) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
      EXPECT_EQ(out.labels[data.size() + s], 1);
      const auto& o = r.origins[s];
      if (o.mode == SynthesisMode::kInterpolate) {
        EXPECT_TRUE(coughscreen::testing::OnSegment(row, data.features.row(o.seed_row),
                                                    data.features.row(o.neighbor_row)));
      }
    }
  }
}

TEST(SvmSmote, Deterministic) {
  std::mt19937_64 rng(14);
  auto d = RandomImbalanced(rng, 50, 9, 3);
  SmoteConfig config;
  config.rng_seed = 99;
  auto a = SvmSmote(d, config);
  auto b = SvmSmote(d, config);
  EXPECT_EQ(a.features, b.features);
  config.rng_seed = 100;
  EXPECT_FALSE(SvmSmote(d, config).features == a.features);
}

TEST(SvmSmote, ExtrapolationStaysInUnitCube) {
  // Minority points far from the majority are safe seeds and extrapolate.
  auto d = MakeDataset({{0.95, 0.95}, {0.99, 0.9}, {0.9, 0.99}, {0.1, 0.1}, {0.2, 0.1},
                        {0.1, 0.2}, {0.15, 0.15}, {0.2, 0.2}, {0.05, 0.1}, {0.1, 0.05}},
                       {1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  SmoteConfig config;
  config.m_danger_neighbors = 2;
  SmoteResult r = SvmSmoteDetailed(d, config);
  bool saw_extrapolation = false;
  for (std::size_t s = 0; s < r.origins.size(); ++s) {
    saw_extrapolation |= r.origins[s].mode == SynthesisMode::kExtrapolate;
    for (double v : r.data.features.row(d.size() + s)) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
  EXPECT_TRUE(saw_extrapolation);
}

}  // namespace
}  // namespace coughscreen::smote
