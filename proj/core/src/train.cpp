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

#include "nester/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "nester/error.hpp"
#include "nester/seed.hpp"

namespace nester {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (head_width < 0) throw ConfigError("head_width must be non-negative");
  if (beta_schedule.linear && !(beta_schedule.start > 0.0 && beta_schedule.end > 0.0)) {
    throw ConfigError("beta schedule endpoints must be positive");
  }
}

RegressionData to_regression(const ObservationalDataset& data) {
  return RegressionData{data.inputs(), data.y};
}

double mse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size() || preds.empty()) {
    throw DimensionError("mse needs equal, non-zero lengths (got " + std::to_string(preds.size()) +
                         " and " + std::to_string(targets.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - targets[i];
    total += e * e;
  }
  return total / static_cast<double>(preds.size());
}

double program_loss(const Ast& program, const ParamStore& params, const RegressionData& data,
                    const EvalContext& ctx) {
  const CompiledProgram compiled(program, params, ctx.input_dim);
  return mse(predict(compiled, params.values, data.inputs, ctx), data.targets);
}

namespace {

double dataset_loss(const CompiledProgram& prog, std::span<const double> theta,
                    const RegressionData& data, const EvalContext& ctx, Tape& tape) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = prog.forward(theta, data.inputs.row(i), ctx, tape) - data.targets[i];
    total += e * e;
  }
  return total / static_cast<double>(data.size());
}

struct RestartOutcome {
  bool diverged = false;
  std::vector<double> best;
  double best_valid = std::numeric_limits<double>::infinity();
  double initial_valid = 0.0;
  int epochs_run = 0;
};

RestartOutcome run_restart(const CompiledProgram& prog, std::vector<double> theta,
                           const RegressionData& train, const RegressionData& valid,
                           const TrainConfig& cfg, const EvalContext& ctx,
                           std::uint64_t restart_seed) {
  RestartOutcome out;
  Tape tape;
  EvalContext step_ctx = ctx;
  const std::size_t n = train.size();
  const std::size_t p = theta.size();
  std::vector<double> grad(p), m(p, 0.0), v(p, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  long step = 0;

  out.initial_valid = dataset_loss(prog, theta, valid, ctx, tape);
  if (std::isfinite(out.initial_valid)) {
    out.best_valid = out.initial_valid;
    out.best = theta;
  }
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.beta_schedule.linear) {
      const double frac = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 1.0;
      step_ctx.beta = cfg.beta_schedule.start + frac * (cfg.beta_schedule.end - cfg.beta_schedule.start);
    }
    std::mt19937_64 shuffle_rng(derive_seed(restart_seed, static_cast<std::uint64_t>(epoch) + 1));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto row = train.inputs.row(i);
        const double err = prog.forward(theta, row, step_ctx, tape) - train.targets[i];
        batch_loss += err * err;
        prog.backward(theta, row, step_ctx, tape, 2.0 * err * scale, grad);
      }
      if (!std::isfinite(batch_loss)) {
        out.diverged = true;
        out.epochs_run = epoch + 1;
        return out;
      }
      ++step;
      if (cfg.optimizer == Optimizer::kAdam) {
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < p; ++k) {
          m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * grad[k];
          v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * grad[k] * grad[k];
          theta[k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.adam_epsilon);
        }
      } else {
        for (std::size_t k = 0; k < p; ++k) theta[k] -= cfg.learning_rate * grad[k];
      }
    }
    out.epochs_run = epoch + 1;
    const double vl = dataset_loss(prog, theta, valid, ctx, tape);
    if (!std::isfinite(vl)) {
      out.diverged = true;
      return out;
    }
    if (vl < out.best_valid) {
      out.best_valid = vl;
      out.best = theta;
    }
  }
  out.diverged = out.best.empty();
  return out;
}

}  // namespace

FitResult fit_regression(const Ast& program, const RegressionData& train,
                         const RegressionData& valid, const TrainConfig& cfg,
                         const EvalContext& ctx) {
  cfg.validate();
  ctx.validate();
  if (train.size() == 0 || valid.size() == 0) throw PreconditionError("training splits must be non-empty");
  if (train.inputs.cols != static_cast<std::size_t>(ctx.input_dim) ||
      valid.inputs.cols != static_cast<std::size_t>(ctx.input_dim)) {
    throw DimensionError("training inputs do not match the evaluation context dimension");
  }
  std::optional<FitResult> best;
  std::optional<CompiledProgram> compiled;
  for (int r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t restart_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    ParamStore init = init_params(program, ctx.input_dim, cfg.head_width, restart_seed);
    if (!compiled) compiled.emplace(program, init, ctx.input_dim);
    RestartOutcome outcome =
        run_restart(*compiled, init.values, train, valid, cfg, ctx, restart_seed);
    if (outcome.diverged) continue;
    if (!best || outcome.best_valid < best->valid_loss) {
      FitResult result;
      result.params = std::move(init);
      result.params.values = std::move(outcome.best);
      result.valid_loss = outcome.best_valid;
      result.initial_valid_loss = outcome.initial_valid;
      result.epochs_run = outcome.epochs_run;
      result.restart = r;
      best = std::move(result);
    }
  }
  if (!best) {
    throw TrainingError("training diverged in every restart for program " + render(program));
  }
  Tape tape;
  best->train_loss = dataset_loss(*compiled, best->params.values, train, ctx, tape);
  return *std::move(best);
}

FitResult fit(const Ast& program, const ObservationalDataset& train,
              const ObservationalDataset& valid, const TrainConfig& cfg, const EvalContext& ctx) {
  return fit_regression(program, to_regression(train), to_regression(valid), cfg, ctx);
}

}  // namespace nester
