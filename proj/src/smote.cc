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

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "coughscreen/error.h"
#include "coughscreen/svm.h"

namespace coughscreen::smote {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

// The k nearest of `candidates` to row `query` (excluding itself), ordered by
// distance then row index.
std::vector<std::size_t> NearestNeighbors(const Matrix& x, std::size_t query,
                                          std::span<const std::size_t> candidates,
                                          std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  for (std::size_t c : candidates) {
    if (c == query) continue;
    dist.emplace_back(SquaredDistance(x.row(query), x.row(c)), c);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

double UnitUniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SmoteResult SvmSmoteDetailed(const data::LabeledDataset& input,
                             const SmoteConfig& config) {
  if (config.k_minority_neighbors < 1 || config.m_danger_neighbors < 1) {
    throw Error(ErrorKind::kValue, "SMOTE neighbour counts must be >= 1");
  }
  if (!input.AllLabelsKnown()) {
    throw Error(ErrorKind::kAugmentation, "SMOTE requires every label to be known");
  }
  SmoteResult result;
  result.data = input;
  const auto [neg, pos] = input.ClassCounts();
  if (neg == pos) return result;
  const int minority_label = pos < neg ? data::kPositive : data::kNegative;
  const std::size_t n_min = std::min(neg, pos);
  const std::size_t n_maj = std::max(neg, pos);
  if (n_min < 2) {
    throw Error(ErrorKind::kAugmentation,
                "minority class has " + std::to_string(n_min) + " sample(s); need >= 2");
  }

  const Matrix& x = input.features;
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.labels[i] == minority_label) minority.push_back(i);
  }
  std::vector<std::size_t> everyone(input.size());
  std::iota(everyone.begin(), everyone.end(), 0);

  models::SvmParams svm_params;
  svm_params.c = config.svm_c;
  svm_params.gamma = config.svm_gamma;
  const models::SvmModel svm = models::FitSvm(x, input.labels, svm_params);
  for (std::size_t idx : svm.support_indices) {
    if (input.labels[idx] == minority_label) result.seeds.push_back(idx);
  }
  if (result.seeds.empty()) {
    result.seeds = minority;
    result.fallback_seeds = true;
  }

  struct SeedPlan {
    std::vector<std::size_t> minority_neighbors;
    SynthesisMode mode;
  };
  std::vector<SeedPlan> plans;
  plans.reserve(result.seeds.size());
  for (std::size_t s : result.seeds) {
    const auto around = NearestNeighbors(x, s, everyone, config.m_danger_neighbors);
    const std::size_t majority_count = static_cast<std::size_t>(
        std::count_if(around.begin(), around.end(), [&](std::size_t r) {
          return input.labels[r] != minority_label;
        }));
    SeedPlan plan;
    plan.mode = 2 * majority_count >= around.size() ? SynthesisMode::kInterpolate
                                                    : SynthesisMode::kExtrapolate;
    plan.minority_neighbors =
        NearestNeighbors(x, s, minority, config.k_minority_neighbors);
    plans.push_back(std::move(plan));
  }

  std::mt19937_64 rng(config.rng_seed);
  const std::size_t needed = n_maj - n_min;
  const std::size_t d = x.cols();
  std::vector<double> row(d);
  result.origins.reserve(needed);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t which = s % result.seeds.size();
    const std::size_t seed_row = result.seeds[which];
    const SeedPlan& plan = plans[which];
    const std::size_t nn =
        plan.minority_neighbors[static_cast<std::size_t>(rng() % plan.minority_neighbors.size())];
    const double u = UnitUniform(rng);
    auto seed = x.row(seed_row);
    auto neighbor = x.row(nn);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = plan.mode == SynthesisMode::kInterpolate
                           ? seed[j] + u * (neighbor[j] - seed[j])
                           : seed[j] + u * (seed[j] - neighbor[j]);
      row[j] = std::clamp(v, 0.0, 1.0);
    }
    result.data.features.AppendRow(row);
    result.data.labels.push_back(minority_label);
    result.data.clip_ids.push_back("synthetic_" + std::to_string(s));
    result.origins.push_back({seed_row, nn, plan.mode, u});
  }
  return result;
}

data::LabeledDataset SvmSmote(const data::LabeledDataset& input,
                              const SmoteConfig& config) {
  return SvmSmoteDetailed(input, config).data;
}

}  // namespace coughscreen::smote
