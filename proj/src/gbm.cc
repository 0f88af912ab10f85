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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "coughscreen/error.h"
#include "coughscreen/metrics.h"
#include "param_util.h"

namespace coughscreen::models {
namespace {

using internal::GetInt;
using internal::GetReal;
using internal::Require;

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) - y z, computed without overflow.
double LogLoss(double z, int y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

struct Split {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

struct Leaf {
  std::int32_t node = 0;
  std::vector<std::uint32_t> rows;
  double sum_g = 0.0;
  double sum_h = 0.0;
  int depth = 0;
  Split split;
};

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const std::vector<double>& grad,
             const std::vector<double>& hess, const GbmParams& params)
      : x_(x), grad_(grad), hess_(hess), params_(params) {}

  // Returns a tree whose leaf values are shrunk by the learning rate; a
  // single-node tree means no admissible split existed.
  Tree Grow(std::vector<std::uint32_t> rows, const std::vector<std::int32_t>& features) {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    leaves.push_back(MakeLeaf(0, std::move(rows), 0, features));

    while (static_cast<int>(leaves.size()) < params_.num_leaves) {
      std::ptrdiff_t best = -1;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].split.feature < 0) continue;
        if (best < 0 || leaves[i].split.gain > leaves[best].split.gain) best = i;
      }
      if (best < 0) break;

      Leaf parent = std::move(leaves[best]);
      leaves.erase(leaves.begin() + best);
      std::vector<std::uint32_t> left_rows, right_rows;
      for (std::uint32_t r : parent.rows) {
        (x_(r, parent.split.feature) <= parent.split.threshold ? left_rows : right_rows)
            .push_back(r);
      }
      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto right_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[parent.node];
      node.feature = parent.split.feature;
      node.threshold = parent.split.threshold;
      node.left = left_id;
      node.right = right_id;

      leaves.push_back(MakeLeaf(left_id, std::move(left_rows), parent.depth + 1, features));
      leaves.push_back(MakeLeaf(right_id, std::move(right_rows), parent.depth + 1, features));
    }

    for (const Leaf& leaf : leaves) {
      tree.nodes[leaf.node].value =
          -params_.learning_rate * leaf.sum_g / (leaf.sum_h + params_.lambda_l2);
    }
    return tree;
  }

 private:
  Leaf MakeLeaf(std::int32_t node, std::vector<std::uint32_t> rows, int depth,
                const std::vector<std::int32_t>& features) {
    Leaf leaf;
    leaf.node = node;
    leaf.depth = depth;
    for (std::uint32_t r : rows) {
      leaf.sum_g += grad_[r];
      leaf.sum_h += hess_[r];
    }
    leaf.rows = std::move(rows);
    if (params_.max_depth <= 0 || depth < params_.max_depth) {
      leaf.split = FindSplit(leaf, features);
    }
    return leaf;
  }

  Split FindSplit(const Leaf& leaf, const std::vector<std::int32_t>& features) {
    Split best;
    const std::size_t m = leaf.rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_data_in_leaf);
    if (m < 2 * min_leaf || m < 2) return best;
    const double lambda = params_.lambda_l2;
    const double parent_score = leaf.sum_g * leaf.sum_g / (leaf.sum_h + lambda);

    order_.resize(m);
    for (std::int32_t f : features) {
      std::copy(leaf.rows.begin(), leaf.rows.end(), order_.begin());
      std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = x_(a, f), vb = x_(b, f);
        return va < vb || (va == vb && a < b);
      });
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const std::uint32_t r = order_[i];
        gl += grad_[r];
        hl += hess_[r];
        const std::size_t n_left = i + 1;
        if (m - n_left < min_leaf) break;
        if (n_left < min_leaf) continue;
        const double v = x_(r, f), v_next = x_(order_[i + 1], f);
        if (v == v_next) continue;
        const double hr = leaf.sum_h - hl;
        if (hl < params_.min_sum_hessian_in_leaf || hr < params_.min_sum_hessian_in_leaf) {
          continue;
        }
        const double gr = leaf.sum_g - gl;
        const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score;
        if (gain > best.gain) {
          double mid = v + (v_next - v) / 2.0;
          if (!(mid < v_next)) mid = v;
          best = {gain, f, mid};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const GbmParams& params_;
  std::vector<std::uint32_t> order_;
};

// Unbiased index in [0, n).
std::size_t UniformIndex(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

nlohmann::json GbmParams::ToJson() const {
  return {{"learning_rate", learning_rate},
          {"num_iterations", num_iterations},
          {"subsample", subsample},
          {"subsample_freq", subsample_freq},
          {"colsample_bytree", colsample_bytree},
          {"early_stopping_rounds", early_stopping_rounds},
          {"num_leaves", num_leaves},
          {"min_data_in_leaf", min_data_in_leaf},
          {"min_sum_hessian_in_leaf", min_sum_hessian_in_leaf},
          {"lambda_l2", lambda_l2},
          {"max_depth", max_depth},
          {"objective", "binary"},
          {"metric", "auc"}};
}

GbmParams GbmParams::FromJson(const nlohmann::json& p) {
  GbmParams g;
  g.learning_rate = GetReal(p, "learning_rate");
  g.num_iterations = static_cast<int>(GetInt(p, "num_iterations"));
  g.subsample = GetReal(p, "subsample");
  g.subsample_freq = static_cast<int>(GetInt(p, "subsample_freq"));
  g.colsample_bytree = GetReal(p, "colsample_bytree");
  g.early_stopping_rounds = static_cast<int>(GetInt(p, "early_stopping_rounds"));
  g.num_leaves = static_cast<int>(GetInt(p, "num_leaves"));
  g.min_data_in_leaf = static_cast<int>(GetInt(p, "min_data_in_leaf"));
  g.min_sum_hessian_in_leaf = GetReal(p, "min_sum_hessian_in_leaf");
  g.lambda_l2 = GetReal(p, "lambda_l2");
  g.max_depth = static_cast<int>(GetInt(p, "max_depth"));
  Require(internal::GetString(p, "objective") == "binary", "gbm objective must be 'binary'");
  Require(internal::GetString(p, "metric") == "auc", "gbm metric must be 'auc'");
  Require(g.learning_rate > 0, "learning_rate must be > 0");
  Require(g.num_iterations >= 1, "num_iterations must be >= 1");
  Require(g.subsample > 0 && g.subsample <= 1, "subsample must be in (0, 1]");
  Require(g.subsample_freq >= 0, "subsample_freq must be >= 0");
  Require(g.colsample_bytree > 0 && g.colsample_bytree <= 1,
          "colsample_bytree must be in (0, 1]");
  Require(g.early_stopping_rounds >= 0, "early_stopping_rounds must be >= 0");
  Require(g.num_leaves >= 2, "num_leaves must be >= 2");
  Require(g.min_data_in_leaf >= 1, "min_data_in_leaf must be >= 1");
  Require(g.min_sum_hessian_in_leaf >= 0, "min_sum_hessian_in_leaf must be >= 0");
  Require(g.lambda_l2 >= 0, "lambda_l2 must be >= 0");
  return g;
}

double GbmModel::RawScore(std::span<const double> x) const {
  double z = init_score_;
  for (const Tree& t : trees_) z += t.Predict(x);
  return z;
}

double GbmModel::Score(std::span<const double> x) const { return Sigmoid(RawScore(x)); }

nlohmann::json GbmModel::Metadata() const {
  return {{"iterations_run", iterations_run_},
          {"best_iteration", best_iteration_},
          {"trees", trees_.size()},
          {"stopping_reason", stopping_reason_}};
}

void GbmModel::Store(ModelArchive& archive) const {
  archive.header["params"] = params_.ToJson();
  archive.header["metadata"] = Metadata();
  archive.header["init_score"] = init_score_;
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back(t.ToJson());
  archive.header["trees"] = std::move(trees);
}

std::unique_ptr<GbmModel> GbmModel::Load(const ModelArchive& archive) {
  auto m = std::make_unique<GbmModel>();
  const auto& h = archive.header;
  m->params_ = GbmParams::FromJson(h.at("params"));
  m->dim_ = h.at("dim").get<std::size_t>();
  m->init_score_ = h.at("init_score").get<double>();
  for (const auto& t : h.at("trees")) m->trees_.push_back(Tree::FromJson(t));
  const auto& meta = h.at("metadata");
  m->iterations_run_ = meta.at("iterations_run").get<int>();
  m->best_iteration_ = meta.at("best_iteration").get<int>();
  m->stopping_reason_ = meta.at("stopping_reason").get<std::string>();
  return m;
}

std::unique_ptr<GbmModel> FitGbm(const data::LabeledDataset& train,
                                 const data::LabeledDataset* valid,
                                 const GbmParams& params, std::uint64_t seed) {
  const std::size_t n = train.size();
  const std::size_t d = train.dim();
  if (n == 0) throw Error(ErrorKind::kFit, "cannot fit gbm on an empty training set");
  if (!train.AllLabelsKnown()) throw Error(ErrorKind::kFit, "gbm training labels must be known");
  if (valid && valid->size() > 0 && valid->dim() != d) {
    throw Error(ErrorKind::kSchema, "gbm train/valid feature widths differ");
  }

  auto model = std::make_unique<GbmModel>();
  model->params_ = params;
  model->dim_ = d;

  const auto [neg, pos] = train.ClassCounts();
  const double prior = std::clamp(static_cast<double>(pos) / static_cast<double>(n),
                                  1e-15, 1.0 - 1e-15);
  model->init_score_ = std::log(prior / (1.0 - prior));

  bool early_stopping = false;
  if (valid && params.early_stopping_rounds > 0) {
    const auto [vneg, vpos] = valid->ClassCounts();
    early_stopping = vneg > 0 && vpos > 0 && valid->AllLabelsKnown();
    if (!early_stopping && valid->size() > 0) {
      std::cerr << "warning: validation set lacks both classes; gbm early stopping disabled\n";
    }
  }

  std::vector<double> f_train(n, model->init_score_);
  std::vector<double> f_valid(early_stopping ? valid->size() : 0, model->init_score_);
  std::vector<double> grad(n), hess(n);
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  std::vector<std::int32_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  const auto bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.subsample * static_cast<double>(n))));
  const auto feature_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.colsample_bytree * static_cast<double>(d))));
  const bool bagging = params.subsample < 1.0 && params.subsample_freq > 0;

  std::mt19937_64 rng(internal::MixSeed(seed, 0x6762));
  TreeGrower grower(train.features, grad, hess, params);
  double best_auc = -1.0;
  model->stopping_reason_ = "max_iterations";

  std::vector<std::uint32_t> rows = all_rows;
  for (int iter = 1; iter <= params.num_iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(f_train[i]);
      grad[i] = p - train.labels[i];
      hess[i] = p * (1.0 - p);
    }

    if (bagging && (iter - 1) % params.subsample_freq == 0) {
      rows = all_rows;
      for (std::size_t i = 0; i < bag_size; ++i) {
        std::swap(rows[i], rows[i + UniformIndex(rng, n - i)]);
      }
      rows.resize(bag_size);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<std::int32_t> features = all_features;
    if (feature_count < d) {
      for (std::size_t i = 0; i < feature_count; ++i) {
        std::swap(features[i], features[i + UniformIndex(rng, d - i)]);
      }
      features.resize(feature_count);
      std::sort(features.begin(), features.end());
    }

    Tree tree = grower.Grow(rows, features);
    if (tree.nodes.size() == 1) {
      model->stopping_reason_ = "no_split";
      break;
    }
    for (std::size_t i = 0; i < n; ++i) f_train[i] += tree.Predict(train.features.row(i));
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += LogLoss(f_train[i], train.labels[i]);
    model->train_loss_.push_back(loss / static_cast<double>(n));
    model->trees_.push_back(std::move(tree));
    model->iterations_run_ = iter;

    if (early_stopping) {
      const Tree& added = model->trees_.back();
      for (std::size_t i = 0; i < f_valid.size(); ++i) {
        f_valid[i] += added.Predict(valid->features.row(i));
      }
      const double auc = metrics::Auc(f_valid, valid->labels);
      model->valid_auc_.push_back(auc);
      if (auc > best_auc) {
        best_auc = auc;
        model->best_iteration_ = iter;
      } else if (iter - model->best_iteration_ >= params.early_stopping_rounds) {
        model->stopping_reason_ = "early_stopping";
        break;
      }
    }
  }

  if (early_stopping && model->best_iteration_ > 0) {
    model->trees_.resize(static_cast<std::size_t>(model->best_iteration_));
  } else {
    model->best_iteration_ = static_cast<int>(model->trees_.size());
  }
  return model;
}

}  // namespace coughscreen::models
