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

#include "coughscreen/mlp.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "coughscreen/error.h"
#include "param_util.h"

namespace coughscreen::models {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMap = Eigen::Map<const RowMat>;
using BiasMap = Eigen::Map<const Eigen::RowVectorXd>;

using internal::GetInt;
using internal::GetReal;
using internal::Require;

struct Activations {
  std::vector<RowMat> pre;   // pre[l + 1] = post[l] W_l + b_l
  std::vector<RowMat> post;  // post[0] = input
};

void Forward(const MlpNetwork& net, const RowMat& input, Activations& act) {
  const std::size_t layers = net.layer_count();
  act.pre.resize(layers + 1);
  act.post.resize(layers + 1);
  act.post[0] = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(net.widths()[l]);
    const auto out = static_cast<Eigen::Index>(net.widths()[l + 1]);
    WeightMap w(net.weights()[l].data(), in, out);
    BiasMap b(net.biases()[l].data(), out);
    act.pre[l + 1].noalias() = act.post[l] * w;
    act.pre[l + 1].rowwise() += b;
    if (l + 1 < layers) {
      act.post[l + 1] = act.pre[l + 1].cwiseMax(0.0);
    } else {
      act.post[l + 1] = act.pre[l + 1];
    }
  }
}

double Softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean loss over the batch; fills grad_w / grad_b when non-null.
double LossAndGradient(const MlpNetwork& net, const RowMat& input,
                       std::span<const int> y, Activations& act,
                       std::vector<RowMat>* grad_w, std::vector<Eigen::RowVectorXd>* grad_b) {
  Forward(net, input, act);
  const std::size_t layers = net.layer_count();
  const Eigen::Index batch = input.rows();
  const RowMat& logits = act.pre[layers];
  double loss = 0.0;
  RowMat delta(batch, 1);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double z = logits(i, 0);
    loss += Softplus(z) - y[i] * z;
    delta(i, 0) = (Sigmoid(z) - y[i]) / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);
  if (!grad_w) return loss;

  grad_w->resize(layers);
  grad_b->resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    (*grad_w)[l].noalias() = act.post[l].transpose() * delta;
    (*grad_b)[l] = delta.colwise().sum();
    if (l > 0) {
      const auto in = static_cast<Eigen::Index>(net.widths()[l]);
      const auto out = static_cast<Eigen::Index>(net.widths()[l + 1]);
      WeightMap w(net.weights()[l].data(), in, out);
      RowMat back = delta * w.transpose();
      delta = back.cwiseProduct((act.pre[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

RowMat ToEigen(const Matrix& x) {
  RowMat m(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
  std::copy(x.data().begin(), x.data().end(), m.data());
  return m;
}

}  // namespace

nlohmann::json MlpParams::ToJson() const {
  return {{"hidden_layers", hidden_layers}, {"learning_rate", learning_rate},
          {"beta1", beta1}, {"beta2", beta2}, {"epsilon", epsilon},
          {"max_epochs", max_epochs}, {"batch_size", batch_size}, {"tol", tol},
          {"n_iter_no_change", n_iter_no_change}};
}

MlpParams MlpParams::FromJson(const nlohmann::json& p) {
  MlpParams m;
  const auto& hidden = p.at("hidden_layers");
  Require(hidden.is_array() && !hidden.empty(), "hidden_layers must be a non-empty array");
  m.hidden_layers.clear();
  for (const auto& h : hidden) {
    Require(h.is_number_integer() && h.get<int>() >= 1, "hidden layer widths must be >= 1");
    m.hidden_layers.push_back(h.get<int>());
  }
  m.learning_rate = GetReal(p, "learning_rate");
  m.beta1 = GetReal(p, "beta1");
  m.beta2 = GetReal(p, "beta2");
  m.epsilon = GetReal(p, "epsilon");
  m.max_epochs = static_cast<int>(GetInt(p, "max_epochs"));
  m.batch_size = static_cast<int>(GetInt(p, "batch_size"));
  m.tol = GetReal(p, "tol");
  m.n_iter_no_change = static_cast<int>(GetInt(p, "n_iter_no_change"));
  Require(m.learning_rate > 0, "learning_rate must be > 0");
  Require(m.beta1 >= 0 && m.beta1 < 1 && m.beta2 >= 0 && m.beta2 < 1, "Adam betas must be in [0, 1)");
  Require(m.epsilon > 0, "epsilon must be > 0");
  Require(m.max_epochs >= 1, "max_epochs must be >= 1");
  Require(m.batch_size >= 1, "batch_size must be >= 1");
  Require(m.n_iter_no_change >= 1, "n_iter_no_change must be >= 1");
  return m;
}

MlpNetwork MlpNetwork::Initialize(std::size_t input_dim, std::span<const int> hidden,
                                  std::uint64_t seed) {
  MlpNetwork net;
  net.widths_.push_back(input_dim);
  for (int h : hidden) net.widths_.push_back(static_cast<std::size_t>(h));
  net.widths_.push_back(1);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.widths_.size(); ++l) {
    const std::size_t in = net.widths_[l], out = net.widths_[l + 1];
    const bool output = l + 2 == net.widths_.size();
    const double bound = std::sqrt((output ? 1.0 : 6.0) / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(in * out);
    for (double& v : w) v = dist(rng);
    net.weights_.push_back(std::move(w));
    net.biases_.emplace_back(out, 0.0);
  }
  return net;
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

std::vector<double> MlpNetwork::Parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].begin(), weights_[l].end());
    flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
  }
  return flat;
}

void MlpNetwork::SetParameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::kSchema, "MLP parameter count mismatch");
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (double& v : weights_[l]) v = flat[k++];
    for (double& v : biases_[l]) v = flat[k++];
  }
}

double MlpNetwork::Logit(std::span<const double> x) const {
  RowMat input(1, static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), input.data());
  Activations act;
  Forward(*this, input, act);
  return act.pre.back()(0, 0);
}

double MlpNetwork::Predict(std::span<const double> x) const { return Sigmoid(Logit(x)); }

double MlpNetwork::Loss(const Matrix& x, std::span<const int> y) const {
  Activations act;
  return LossAndGradient(*this, ToEigen(x), y, act, nullptr, nullptr);
}

std::vector<double> MlpNetwork::Gradient(const Matrix& x, std::span<const int> y) const {
  Activations act;
  std::vector<RowMat> gw;
  std::vector<Eigen::RowVectorXd> gb;
  LossAndGradient(*this, ToEigen(x), y, act, &gw, &gb);
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), gw[l].data(), gw[l].data() + gw[l].size());
    flat.insert(flat.end(), gb[l].data(), gb[l].data() + gb[l].size());
  }
  return flat;
}

nlohmann::json MlpModel::Metadata() const {
  return {{"epochs", epochs_},
          {"stopping_reason", stopping_reason_},
          {"final_loss", loss_curve_.empty() ? 0.0 : loss_curve_.back()}};
}

void MlpModel::Store(ModelArchive& archive) const {
  archive.header["params"] = params_.ToJson();
  archive.header["metadata"] = Metadata();
  archive.header["widths"] = network_.widths();
  for (std::size_t l = 0; l < network_.layer_count(); ++l) {
    archive.blobs.push_back(network_.weights()[l]);
    archive.blobs.push_back(network_.biases()[l]);
  }
}

std::unique_ptr<MlpModel> MlpModel::Load(const ModelArchive& archive) {
  const auto& h = archive.header;
  MlpParams params = MlpParams::FromJson(h.at("params"));
  const auto widths = h.at("widths").get<std::vector<std::size_t>>();
  if (widths.size() < 2 || archive.blobs.size() != 2 * (widths.size() - 1)) {
    throw Error(ErrorKind::kSchema, "MLP archive layer count mismatch");
  }
  std::vector<int> hidden(widths.begin() + 1, widths.end() - 1);
  MlpNetwork net = MlpNetwork::Initialize(widths.front(), hidden, 0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (archive.blobs[2 * l].size() != widths[l] * widths[l + 1] ||
        archive.blobs[2 * l + 1].size() != widths[l + 1]) {
      throw Error(ErrorKind::kSchema, "MLP archive blob size mismatch");
    }
    net.weights()[l] = archive.blobs[2 * l];
    net.biases()[l] = archive.blobs[2 * l + 1];
  }
  const auto& meta = h.at("metadata");
  return std::make_unique<MlpModel>(std::move(params), std::move(net),
                                    meta.at("epochs").get<int>(),
                                    meta.at("stopping_reason").get<std::string>(),
                                    std::vector<double>{meta.at("final_loss").get<double>()});
}

std::unique_ptr<MlpModel> FitMlp(const data::LabeledDataset& train, const MlpParams& params,
                                 std::uint64_t seed) {
  const std::size_t n = train.size();
  if (n == 0) throw Error(ErrorKind::kFit, "cannot fit an MLP on an empty training set");
  if (!train.AllLabelsKnown()) throw Error(ErrorKind::kFit, "MLP training labels must be known");

  MlpNetwork net = MlpNetwork::Initialize(train.dim(), params.hidden_layers,
                                          internal::MixSeed(seed, 0x6d6c70));
  const std::size_t layers = net.layer_count();
  std::vector<std::vector<double>> m_w(layers), v_w(layers), m_b(layers), v_b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    m_w[l].assign(net.weights()[l].size(), 0.0);
    v_w[l].assign(net.weights()[l].size(), 0.0);
    m_b[l].assign(net.biases()[l].size(), 0.0);
    v_b[l].assign(net.biases()[l].size(), 0.0);
  }

  const RowMat x_all = ToEigen(train.features);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(internal::MixSeed(seed, 0x73687566));

  Activations act;
  std::vector<RowMat> gw;
  std::vector<Eigen::RowVectorXd> gb;
  std::vector<double> loss_curve;
  double best_loss = std::numeric_limits<double>::infinity();
  int no_improvement = 0;
  std::string reason = "max_epochs";
  std::uint64_t step = 0;
  int epoch = 0;
  const auto batch_size = static_cast<std::size_t>(params.batch_size);
  std::vector<int> batch_labels;

  auto adam = [&](std::vector<double>& param, std::vector<double>& m, std::vector<double>& v,
                  const double* grad, double lr_t) {
    for (std::size_t k = 0; k < param.size(); ++k) {
      m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * grad[k];
      v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * grad[k] * grad[k];
      param[k] -= lr_t * m[k] / (std::sqrt(v[k]) + params.epsilon);
    }
  };

  for (epoch = 1; epoch <= params.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      RowMat batch(b, x_all.cols());
      batch_labels.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = x_all.row(static_cast<Eigen::Index>(order[i]));
        batch_labels[i - start] = train.labels[order[i]];
      }
      const double loss = LossAndGradient(net, batch, batch_labels, act, &gw, &gb);
      epoch_loss += loss * static_cast<double>(end - start);

      ++step;
      const double lr_t = params.learning_rate *
                          std::sqrt(1.0 - std::pow(params.beta2, static_cast<double>(step))) /
                          (1.0 - std::pow(params.beta1, static_cast<double>(step)));
      for (std::size_t l = 0; l < layers; ++l) {
        adam(net.weights()[l], m_w[l], v_w[l], gw[l].data(), lr_t);
        adam(net.biases()[l], m_b[l], v_b[l], gb[l].data(), lr_t);
      }
    }
    epoch_loss /= static_cast<double>(n);
    loss_curve.push_back(epoch_loss);

    if (epoch_loss > best_loss - params.tol) {
      ++no_improvement;
    } else {
      no_improvement = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (no_improvement > params.n_iter_no_change) {
      reason = "converged";
      break;
    }
  }
  const int epochs_run = std::min(epoch, params.max_epochs);
  return std::make_unique<MlpModel>(params, std::move(net), epochs_run, reason,
                                    std::move(loss_curve));
}

}  // namespace coughscreen::models
