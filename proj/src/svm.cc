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

#include "coughscreen/svm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "coughscreen/error.h"

namespace coughscreen::models {
namespace {

constexpr double kTau = 1e-12;

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

// LRU cache of kernel rows K(i, .).
class KernelCache {
 public:
  KernelCache(const Matrix& x, double gamma, std::size_t cache_bytes)
      : x_(x), gamma_(gamma) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, cache_bytes / row_bytes);
  }

  const std::vector<double>& Row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::vector<double> row;
    if (lru_.size() >= capacity_) {
      row = std::move(lru_.back().second);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    row.resize(x_.rows());
    auto xi = x_.row(i);
    for (std::size_t j = 0; j < x_.rows(); ++j) {
      row[j] = std::exp(-gamma_ * SquaredDistance(xi, x_.row(j)));
    }
    lru_.emplace_front(i, std::move(row));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

}  // namespace

double ScaleGamma(const Matrix& x) {
  const auto& v = x.data();
  if (v.empty()) return 1.0;
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(v.size());
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

double SvmModel::Decision(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < dual_coef.size(); ++i) {
    acc += dual_coef[i] * std::exp(-gamma * SquaredDistance(support_vectors.row(i), x));
  }
  return acc - rho;
}

SvmModel FitSvm(const Matrix& x, std::span<const int> labels,
                const SvmParams& params) {
  const std::size_t n = x.rows();
  if (labels.size() != n) throw Error(ErrorKind::kSchema, "SVM label count mismatch");
  std::vector<double> y(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    positives += labels[i] == 1;
  }
  if (positives == 0 || positives == n) {
    throw Error(ErrorKind::kFit, "SVM needs at least one sample of each class");
  }
  if (!(params.c > 0.0)) throw Error(ErrorKind::kValue, "SVM C must be > 0");

  SvmModel model;
  model.gamma = params.gamma.value_or(ScaleGamma(x));
  if (!(model.gamma > 0.0)) throw Error(ErrorKind::kValue, "SVM gamma must be > 0");
  const double c = params.c;
  KernelCache cache(x, model.gamma, params.cache_bytes);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const double qd = 1.0;  // RBF: K(i, i) = 1
  auto is_upper = [&](std::size_t i) { return alpha[i] >= c; };
  auto is_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // i: maximal violating index; j: second-order gain.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t sel_i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!is_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; sel_i = t; }
      } else {
        if (!is_lower(t) && grad[t] >= gmax) { gmax = grad[t]; sel_i = t; }
      }
    }
    if (sel_i < 0) break;
    const auto i = static_cast<std::size_t>(sel_i);
    const std::vector<double>& ki = cache.Row(i);

    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::ptrdiff_t sel_j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const double q_it = y[i] * y[t] * ki[t];
      if (y[t] > 0) {
        if (is_lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0) {
          double quad = qd + qd - 2.0 * y[i] * q_it;
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) { best_obj = obj; sel_j = t; }
        }
      } else {
        if (is_upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0) {
          double quad = qd + qd + 2.0 * y[i] * q_it;
          if (quad <= 0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) { best_obj = obj; sel_j = t; }
        }
      }
    }
    if (gmax + gmax2 < params.tolerance || sel_j < 0) break;
    const auto j = static_cast<std::size_t>(sel_j);
    const std::vector<double>& kj = cache.Row(j);
    // Row i is most recent, so fetching j (capacity >= 2) never evicts it.
    const double q_ij = y[i] * y[j] * ki[j];

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd + qd + 2.0 * q_ij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = qd + qd - 2.0 * q_ij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }

    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }
  }
  model.iterations = iter;
  model.converged = iter < max_iter;

  // Bias from free multipliers, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  model.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  model.support_vectors = Matrix(0, x.cols());
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.AppendRow(x.row(t));
      model.dual_coef.push_back(alpha[t] * y[t]);
      model.support_indices.push_back(t);
    }
  }
  return model;
}

}  // namespace coughscreen::models
