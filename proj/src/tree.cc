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

#include "coughscreen/tree.h"

#include <algorithm>

#include "coughscreen/error.h"

namespace coughscreen::models {

std::size_t Tree::LeafCount() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

std::size_t Tree::Depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack = {{0, 0}};
  std::size_t depth = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return depth;
}

// Columnar layout keeps archives compact.
nlohmann::json Tree::ToJson() const {
  nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                 left = nlohmann::json::array(), right = nlohmann::json::array(),
                 value = nlohmann::json::array();
  for (const auto& n : nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right}, {"value", value}};
}

Tree Tree::FromJson(const nlohmann::json& doc) {
  Tree t;
  const auto& feature = doc.at("feature");
  const std::size_t n = feature.size();
  if (doc.at("threshold").size() != n || doc.at("left").size() != n ||
      doc.at("right").size() != n || doc.at("value").size() != n || n == 0) {
    throw Error(ErrorKind::kSchema, "malformed tree in model archive");
  }
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.feature = feature[i].get<std::int32_t>();
    node.threshold = doc["threshold"][i].get<double>();
    node.left = doc["left"][i].get<std::int32_t>();
    node.right = doc["right"][i].get<std::int32_t>();
    node.value = doc["value"][i].get<double>();
    if (node.feature >= 0 &&
        (node.left <= static_cast<std::int32_t>(i) || node.right <= static_cast<std::int32_t>(i) ||
         node.left >= static_cast<std::int32_t>(n) || node.right >= static_cast<std::int32_t>(n))) {
      throw Error(ErrorKind::kSchema, "tree child index out of range");
    }
  }
  return t;
}

}  // namespace coughscreen::models
