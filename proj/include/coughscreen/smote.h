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

// SVM-SMOTE: minority oversampling seeded from the minority-class support
// vectors of an RBF SVM. Seeds in a majority-dominated neighbourhood
// interpolate toward a minority neighbour; the rest extrapolate away from it.

#ifndef COUGHSCREEN_SMOTE_H_
#define COUGHSCREEN_SMOTE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "coughscreen/dataset.h"

namespace coughscreen::smote {

struct SmoteConfig {
  std::size_t k_minority_neighbors = 5;
  std::size_t m_danger_neighbors = 10;
  std::uint64_t rng_seed = 0;
  double svm_c = 1.0;
  std::optional<double> svm_gamma;  // unset: `scale`
};

enum class SynthesisMode { kInterpolate, kExtrapolate };

struct SyntheticOrigin {
  std::size_t seed_row = 0;      // row index in the input
  std::size_t neighbor_row = 0;  // row index in the input
  SynthesisMode mode = SynthesisMode::kInterpolate;
  double step = 0.0;             // u in [0, 1)
};

struct SmoteResult {
  // Input rows verbatim, then synthetics in generation order.
  data::LabeledDataset data;
  std::vector<SyntheticOrigin> origins;  // one per synthetic row
  std::vector<std::size_t> seeds;       // input rows used as seeds
  bool fallback_seeds = false;          // SVM produced no minority SVs
};

// Expects features scaled to [0, 1]. Throws Error(kAugmentation) when the
// minority class has fewer than two rows.
SmoteResult SvmSmoteDetailed(const data::LabeledDataset& input,
                             const SmoteConfig& config);

data::LabeledDataset SvmSmote(const data::LabeledDataset& input,
                              const SmoteConfig& config);

}  // namespace coughscreen::smote

#endif  // COUGHSCREEN_SMOTE_H_
