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

#ifndef COUGHSCREEN_TREE_H_
#define COUGHSCREEN_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace coughscreen::models {

// Binary decision tree stored as a flat node array. Rows with
// x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf output
};

struct Tree {
  std::vector<TreeNode> nodes;

  double Predict(std::span<const double> x) const {
    std::int32_t i = 0;
    while (nodes[i].feature >= 0) {
      i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].value;
  }

  std::size_t LeafCount() const;
  std::size_t Depth() const;

  nlohmann::json ToJson() const;
  static Tree FromJson(const nlohmann::json& doc);
};

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_TREE_H_
