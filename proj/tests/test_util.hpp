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

// Shared fixtures for the unit tests: a random program generator, a
// central-difference gradient oracle and small dataset builders.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nester/data.hpp"
#include "nester/dsl.hpp"
#include "nester/interp.hpp"
#include "nester/train.hpp"

namespace nester::testing {

// Expands the leftmost hole with a uniformly chosen rule until the program is
// complete, never letting the depth exceed max_depth.
inline Ast random_program(const Grammar& grammar, int max_depth, std::mt19937_64& rng) {
  Ast program = ast::hole(Sort::kReal, 0);
  while (!is_complete(program)) {
    const int id = leftmost_hole(program);
    std::vector<Ast> options;
    for (const Rule* rule : grammar.rules_for(hole_sort(program, id))) {
      Ast child = expand(program, id, *rule);
      if (depth(child) <= max_depth) options.push_back(std::move(child));
    }
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    program = options[pick(rng)];
  }
  return program;
}

// Random partial program: a random number of expansions from the root.
inline Ast random_partial(const Grammar& grammar, int max_depth, int steps, std::mt19937_64& rng) {
  Ast program = ast::hole(Sort::kReal, 0);
  for (int s = 0; s < steps && !is_complete(program); ++s) {
    const int id = leftmost_hole(program);
    std::vector<Ast> options;
    for (const Rule* rule : grammar.rules_for(hole_sort(program, id))) {
      Ast child = expand(program, id, *rule);
      if (depth(child) <= max_depth) options.push_back(std::move(child));
    }
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    program = options[pick(rng)];
  }
  return program;
}

struct GradientCheck {
  std::size_t coordinates = 0;
  std::size_t failures = 0;
  double worst_relative = 0.0;
};

// Compares the analytic gradient of the batch MSE against central
// differences with step h.
inline GradientCheck check_gradient(const Ast& program, ParamStore params,
                                    std::span<const Sample> batch, const EvalContext& ctx,
                                    double h = 1e-5, double rel_tol = 1e-4,
                                    double abs_floor = 1e-8) {
  GradientCheck out;
  const LossGrad analytic = grad(program, params, batch, ctx);
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const double saved = params.values[i];
    params.values[i] = saved + h;
    const double up = grad(program, params, batch, ctx).loss;
    params.values[i] = saved - h;
    const double down = grad(program, params, batch, ctx).loss;
    params.values[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.gradient[i];
    const double err = std::abs(a - numeric);
    const double scale = std::max(std::abs(a), std::abs(numeric));
    ++out.coordinates;
    if (err > std::max(abs_floor, rel_tol * scale)) ++out.failures;
    if (scale > 0) out.worst_relative = std::max(out.worst_relative, err / scale);
  }
  return out;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : m.data) x = u(rng);
  return m;
}

// y = 1 + tau*t + sum_j x_j / (j+1), with exact potential outcomes.
inline ObservationalDataset linear_dataset(std::size_t n, std::size_t d, double tau,
                                           std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  ObservationalDataset data;
  data.x = Matrix(n, d);
  data.t.resize(n);
  data.y.resize(n);
  data.y0 = std::vector<double>(n);
  data.y1 = std::vector<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double base = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      data.x(i, j) = gauss(rng);
      base += data.x(i, j) / static_cast<double>(j + 1);
    }
    const double e = noise * gauss(rng);
    data.t[i] = coin(rng) ? 1.0 : 0.0;
    (*data.y0)[i] = base + e;
    (*data.y1)[i] = base + tau + e;
    data.y[i] = data.t[i] == 1.0 ? (*data.y1)[i] : (*data.y0)[i];
  }
  return data;
}

inline TrainConfig quick_config(std::uint64_t seed = 0, int epochs = 20) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-2;
  cfg.restarts = 1;
  cfg.head_width = 4;
  cfg.seed = seed;
  return cfg;
}

}  // namespace nester::testing
