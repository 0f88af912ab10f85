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

// Soft-margin RBF kernel SVM trained by SMO with second-order working-set
// selection. Shared by the SVM back end and the SVM-SMOTE seed detector.

#ifndef COUGHSCREEN_SVM_H_
#define COUGHSCREEN_SVM_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "coughscreen/matrix.h"

namespace coughscreen::models {

struct SvmParams {
  double c = 1.0;
  std::optional<double> gamma;  // unset: the `scale` rule
  double tolerance = 1e-3;
  std::size_t cache_bytes = 256u << 20;
};

// 1 / (d * Var(X)) over all elements of X; 1.0 when X has zero variance.
double ScaleGamma(const Matrix& x);

struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  std::vector<std::size_t> support_indices;  // rows of the training matrix
  double rho = 0.0;
  double gamma = 1.0;
  std::size_t iterations = 0;
  bool converged = true;

  // sum_i coef_i K(sv_i, x) - rho; positive favours label 1.
  double Decision(std::span<const double> x) const;
};

// labels are 0/1. Throws Error(kFit) when only one class is present.
SvmModel FitSvm(const Matrix& x, std::span<const int> labels,
                const SvmParams& params = {});

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_SVM_H_
