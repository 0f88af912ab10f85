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

// Fully connected ReLU network with a sigmoid output, trained on binary
// cross-entropy with Adam.

#ifndef COUGHSCREEN_MLP_H_
#define COUGHSCREEN_MLP_H_

#include <cstdint>
#include <span>
#include <vector>

#include "coughscreen/classifiers.h"

namespace coughscreen::models {

struct MlpParams {
  std::vector<int> hidden_layers = {4096, 4096};
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 200;
  int batch_size = 32;
  // Training stops once the epoch loss fails to improve by `tol` for more
  // than n_iter_no_change consecutive epochs.
  double tol = 1e-4;
  int n_iter_no_change = 10;

  nlohmann::json ToJson() const;
  static MlpParams FromJson(const nlohmann::json& doc);
};

// Parameters of the network. Layer l maps widths[l] -> widths[l + 1];
// weights are row-major (input x output).
class MlpNetwork {
 public:
  MlpNetwork() = default;
  // He-style uniform weights with bound sqrt(6 / fan_in) on hidden layers
  // and sqrt(1 / fan_in) on the output layer; zero biases.
  static MlpNetwork Initialize(std::size_t input_dim, std::span<const int> hidden,
                               std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t parameter_count() const;

  // Flat view: for each layer, weights then biases.
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> flat);

  // Pre-sigmoid output for one row.
  double Logit(std::span<const double> x) const;
  double Predict(std::span<const double> x) const;

  // Mean binary cross-entropy over rows and its gradient (flat layout).
  double Loss(const Matrix& x, std::span<const int> y) const;
  std::vector<double> Gradient(const Matrix& x, std::span<const int> y) const;

  std::vector<std::vector<double>>& weights() { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

 private:
  friend class MlpTrainer;

  std::vector<std::size_t> widths_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

class MlpModel final : public TrainedModel {
 public:
  MlpModel(MlpParams params, MlpNetwork network, int epochs, std::string reason,
           std::vector<double> loss_curve)
      : params_(std::move(params)), network_(std::move(network)), epochs_(epochs),
        stopping_reason_(std::move(reason)), loss_curve_(std::move(loss_curve)) {}

  ModelKind kind() const override { return ModelKind::kMlp; }
  std::size_t dim() const override { return network_.widths().front(); }
  double Score(std::span<const double> x) const override { return network_.Predict(x); }
  nlohmann::json Metadata() const override;
  void Store(ModelArchive& archive) const override;
  static std::unique_ptr<MlpModel> Load(const ModelArchive& archive);

  const MlpNetwork& network() const { return network_; }
  const std::vector<double>& loss_curve() const { return loss_curve_; }

 private:
  MlpParams params_;
  MlpNetwork network_;
  int epochs_;
  std::string stopping_reason_;
  std::vector<double> loss_curve_;
};

std::unique_ptr<MlpModel> FitMlp(const data::LabeledDataset& train,
                                 const MlpParams& params, std::uint64_t seed);

}  // namespace coughscreen::models

#endif  // COUGHSCREEN_MLP_H_
