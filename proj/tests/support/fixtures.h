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

// Small builders for in-memory datasets.

#ifndef COUGHSCREEN_TESTS_SUPPORT_FIXTURES_H_
#define COUGHSCREEN_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "coughscreen/dataset.h"

namespace coughscreen::testing {

inline data::LabeledDataset MakeDataset(const std::vector<std::vector<double>>& rows,
                                        const std::vector<int>& labels) {
  data::LabeledDataset d;
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  d.features = Matrix(0, dim);
  for (const auto& r : rows) d.features.AppendRow(r);
  d.labels = labels;
  d.schema.blocks = {{"x", 0, dim}};
  for (std::size_t i = 0; i < rows.size(); ++i) d.clip_ids.push_back("row" + std::to_string(i));
  return d;
}

// n rows in [0,1]^d; positives shifted by +margin along feature 0 so the set
// is linearly separable when margin > 0.
inline data::LabeledDataset SeparableDataset(std::size_t n, std::size_t d, double margin,
                                             std::uint64_t seed, double positive_rate = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  const auto positives = static_cast<std::size_t>(positive_rate * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i < positives ? 1 : 0;
    std::vector<double> r(d);
    for (double& v : r) v = u(rng);
    r[0] = y ? 0.5 + margin / 2 + (0.5 - margin / 2) * u(rng) : (0.5 - margin / 2) * u(rng);
    rows.push_back(r);
    labels.push_back(y);
  }
  return MakeDataset(rows, labels);
}

inline data::LabeledDataset XorDataset() {
  return MakeDataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1});
}

}  // namespace coughscreen::testing

#endif  // COUGHSCREEN_TESTS_SUPPORT_FIXTURES_H_
