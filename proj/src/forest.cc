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

#include "coughscreen/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>

#include "coughscreen/error.h"
#include "coughscreen/parallel.h"
#include "param_util.h"

namespace coughscreen::models {
namespace {

using internal::GetBool;
using internal::GetInt;
using internal::Require;

double Gini(double pos, double total) {
  if (total <= 0) return 0.0;
  const double p = pos / total;
  return 2.0 * p * (1.0 - p);
}

struct NodeTask {
  std::int32_t node;
  std::vector<std::uint32_t> rows;  // may repeat under bootstrap
  int depth;
};

class ForestTreeBuilder {
 public:
  ForestTreeBuilder(const data::LabeledDataset& train, const ForestParams& params,
                    std::size_t max_features, std::uint64_t seed)
      : x_(train.features), y_(train.labels), params_(params),
        max_features_(max_features), rng_(seed) {}

  Tree Build() {
    const std::size_t n = x_.rows();
    std::vector<std::uint32_t> rows(n);
    if (params_.bootstrap) {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
      for (auto& r : rows) r = pick(rng_);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<NodeTask> stack;
    stack.push_back({0, std::move(rows), 0});
    while (!stack.empty()) {
      NodeTask task = std::move(stack.back());
      stack.pop_back();
      std::size_t pos = 0;
      for (std::uint32_t r : task.rows) pos += y_[r] == 1;
      const std::size_t m = task.rows.size();
      tree.nodes[task.node].value = static_cast<double>(pos) / static_cast<double>(m);

      if (task.depth >= params_.max_depth || m < static_cast<std::size_t>(params_.min_samples_split) ||
          pos == 0 || pos == m) {
        continue;
      }
      const Candidate split = ChooseSplit(task.rows, pos);
      if (split.feature < 0) continue;

      std::vector<std::uint32_t> left, right;
      for (std::uint32_t r : task.rows) {
        (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
      }
      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto right_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[task.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left_id;
      node.right = right_id;
      stack.push_back({right_id, std::move(right), task.depth + 1});
      stack.push_back({left_id, std::move(left), task.depth + 1});
    }
    return tree;
  }

 private:
  struct Candidate {
    double impurity = std::numeric_limits<double>::infinity();  // weighted children
    std::int32_t feature = -1;
    double threshold = 0.0;
  };

  Candidate ChooseSplit(const std::vector<std::uint32_t>& rows, std::size_t pos) {
    const std::size_t d = x_.cols();
    std::vector<std::int32_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    Candidate best;
    std::size_t examined = 0;
    // Lazily shuffled feature order; constant features do not count toward
    // max_features.
    for (std::size_t k = 0; k < d && examined < max_features_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, d - 1);
      std::swap(order[k], order[pick(rng_)]);
      const std::int32_t f = order[k];
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::uint32_t r : rows) {
        lo = std::min(lo, x_(r, f));
        hi = std::max(hi, x_(r, f));
      }
      if (!(hi > lo)) continue;
      ++examined;
      if (params_.random_thresholds) {
        double t = std::uniform_real_distribution<double>(lo, hi)(rng_);
        if (!(t < hi)) t = lo;
        ConsiderThreshold(rows, pos, f, t, best);
      } else {
        BestExactThreshold(rows, pos, f, best);
      }
    }
    return best;
  }

  void ConsiderThreshold(const std::vector<std::uint32_t>& rows, std::size_t pos,
                         std::int32_t f, double t, Candidate& best) {
    std::size_t n_left = 0, pos_left = 0;
    for (std::uint32_t r : rows) {
      if (x_(r, f) <= t) {
        ++n_left;
        pos_left += y_[r] == 1;
      }
    }
    const std::size_t m = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (n_left < min_leaf || m - n_left < min_leaf) return;
    const double impurity =
        static_cast<double>(n_left) * Gini(static_cast<double>(pos_left), static_cast<double>(n_left)) +
        static_cast<double>(m - n_left) *
            Gini(static_cast<double>(pos - pos_left), static_cast<double>(m - n_left));
    if (impurity < best.impurity) best = {impurity, f, t};
  }

  void BestExactThreshold(const std::vector<std::uint32_t>& rows, std::size_t pos,
                          std::int32_t f, Candidate& best) {
    sorted_.assign(rows.begin(), rows.end());
    std::sort(sorted_.begin(), sorted_.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = x_(a, f), vb = x_(b, f);
      return va < vb || (va == vb && a < b);
    });
    const std::size_t m = sorted_.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    std::size_t pos_left = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      pos_left += y_[sorted_[i]] == 1;
      const std::size_t n_left = i + 1;
      if (m - n_left < min_leaf) break;
      if (n_left < min_leaf) continue;
      const double v = x_(sorted_[i], f), v_next = x_(sorted_[i + 1], f);
      if (v == v_next) continue;
      const double impurity =
          static_cast<double>(n_left) * Gini(static_cast<double>(pos_left), static_cast<double>(n_left)) +
          static_cast<double>(m - n_left) *
              Gini(static_cast<double>(pos - pos_left), static_cast<double>(m - n_left));
      if (impurity < best.impurity) {
        double mid = v + (v_next - v) / 2.0;
        if (!(mid < v_next)) mid = v;
        best = {impurity, f, mid};
      }
    }
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  const ForestParams& params_;
  std::size_t max_features_;
  std::mt19937_64 rng_;
  std::vector<std::uint32_t> sorted_;
};

}  // namespace

ForestParams ForestParams::RandomForestDefaults() { return ForestParams{}; }

ForestParams ForestParams::ExtraTreesDefaults() {
  ForestParams p;
  p.bootstrap = false;
  p.random_thresholds = true;
  return p;
}

nlohmann::json ForestParams::ToJson() const {
  return {{"n_estimators", n_estimators},
          {"max_depth", max_depth},
          {"min_samples_split", min_samples_split},
          {"min_samples_leaf", min_samples_leaf},
          {"max_features", max_features},
          {"bootstrap", bootstrap}};
}

ForestParams ForestParams::FromJson(const nlohmann::json& p, ForestParams base) {
  base.n_estimators = static_cast<int>(GetInt(p, "n_estimators"));
  base.max_depth = static_cast<int>(GetInt(p, "max_depth"));
  base.min_samples_split = static_cast<int>(GetInt(p, "min_samples_split"));
  base.min_samples_leaf = static_cast<int>(GetInt(p, "min_samples_leaf"));
  base.max_features = static_cast<int>(GetInt(p, "max_features"));
  base.bootstrap = GetBool(p, "bootstrap");
  Require(base.n_estimators >= 1, "n_estimators must be >= 1");
  Require(base.max_depth >= 1, "max_depth must be >= 1");
  Require(base.min_samples_split >= 2, "min_samples_split must be >= 2");
  Require(base.min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
  Require(base.max_features >= 0, "max_features must be >= 0 (0 = sqrt)");
  return base;
}

double ForestModel::Score(std::span<const double> x) const {
  double acc = 0.0;
  for (const Tree& t : trees_) acc += t.Predict(x);
  return acc / static_cast<double>(trees_.size());
}

nlohmann::json ForestModel::Metadata() const {
  std::size_t max_depth = 0, leaves = 0;
  for (const Tree& t : trees_) {
    max_depth = std::max(max_depth, t.Depth());
    leaves += t.LeafCount();
  }
  return {{"trees", trees_.size()}, {"max_depth_reached", max_depth}, {"leaves", leaves}};
}

void ForestModel::Store(ModelArchive& archive) const {
  archive.header["params"] = params_.ToJson();
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back(t.ToJson());
  archive.header["trees"] = std::move(trees);
}

std::unique_ptr<ForestModel> ForestModel::Load(const ModelArchive& archive) {
  const auto& h = archive.header;
  const ModelKind kind = ParseModelKind(h.at("kind").get<std::string>());
  ForestParams base = kind == ModelKind::kExtraTrees ? ForestParams::ExtraTreesDefaults()
                                                     : ForestParams::RandomForestDefaults();
  ForestParams params = ForestParams::FromJson(h.at("params"), base);
  std::vector<Tree> trees;
  for (const auto& t : h.at("trees")) trees.push_back(Tree::FromJson(t));
  if (trees.empty()) throw Error(ErrorKind::kSchema, "forest archive has no trees");
  return std::make_unique<ForestModel>(kind, params, h.at("dim").get<std::size_t>(),
                                       std::move(trees));
}

std::unique_ptr<ForestModel> FitForest(ModelKind kind, const data::LabeledDataset& train,
                                       const ForestParams& params, std::uint64_t seed) {
  if (kind != ModelKind::kRandomForest && kind != ModelKind::kExtraTrees) {
    throw Error(ErrorKind::kValue, "FitForest needs random_forest or extra_trees");
  }
  if (train.size() == 0) throw Error(ErrorKind::kFit, "cannot fit a forest on an empty training set");
  if (!train.AllLabelsKnown()) throw Error(ErrorKind::kFit, "forest training labels must be known");
  const std::size_t d = train.dim();
  const std::size_t max_features =
      params.max_features > 0
          ? std::min<std::size_t>(d, static_cast<std::size_t>(params.max_features))
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

  std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
  ParallelFor(trees.size(), [&](std::size_t i) {
    ForestTreeBuilder builder(train, params, max_features, internal::MixSeed(seed, i));
    trees[i] = builder.Build();
  });
  return std::make_unique<ForestModel>(kind, params, d, std::move(trees));
}

}  // namespace coughscreen::models
