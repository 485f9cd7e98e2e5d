// Copyright 2026 The Nester Authors. All Rights Reserved.
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

#ifndef NESTER_TRAIN_HPP_
#define NESTER_TRAIN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "nester/data.hpp"
#include "nester/dsl.hpp"
#include "nester/interp.hpp"
#include "nester/matrix.hpp"

namespace nester {

enum class Optimizer { kSgd, kAdam };

// Temperature used for gradient steps. Validation always uses the
// evaluation context's beta.
struct BetaSchedule {
  bool linear = false;
  double start = 1.0;
  double end = 10.0;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int restarts = 1;
  std::uint64_t seed = 0;
  BetaSchedule beta_schedule;
  int head_width = 32;

  void validate() const;
};

struct FitResult {
  ParamStore params;
  double train_loss = 0.0;
  // Minimum validation loss over epochs (including initialization) and
  // restarts.
  double valid_loss = 0.0;
  double initial_valid_loss = 0.0;
  int epochs_run = 0;
  int restart = 0;
};

// Inputs (one row per unit) and regression targets.
struct RegressionData {
  Matrix inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
};

// v = [t; x] rows and observed outcomes.
RegressionData to_regression(const ObservationalDataset& data);

double mse(std::span<const double> preds, std::span<const double> targets);

// Mean squared error of a parameterized program over a whole dataset.
double program_loss(const Ast& program, const ParamStore& params, const RegressionData& data,
                    const EvalContext& ctx);

// Minibatch gradient descent on the squared error. Restart r initializes
// from derive_seed(cfg.seed, r); the parameters with the lowest validation
// loss across restarts are returned. Throws TrainingError when every restart
// diverges.
FitResult fit_regression(const Ast& program, const RegressionData& train,
                         const RegressionData& valid, const TrainConfig& cfg,
                         const EvalContext& ctx);

FitResult fit(const Ast& program, const ObservationalDataset& train,
              const ObservationalDataset& valid, const TrainConfig& cfg, const EvalContext& ctx);

}  // namespace nester

#endif  // NESTER_TRAIN_HPP_
