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

#ifndef NESTER_BASELINES_HPP_
#define NESTER_BASELINES_HPP_

#include <string>
#include <vector>

#include "nester/causal.hpp"
#include "nester/data.hpp"

namespace nester {

enum class BaselineKind { kOls1, kOls2, kKnn };

inline constexpr double kRidgeJitter = 1e-8;

struct BaselineModel {
  BaselineKind kind = BaselineKind::kOls1;
  int k = 5;
  // ols1: [intercept, t, x...]. ols2: [intercept, x...] per arm.
  std::vector<double> coef;
  std::vector<double> coef_treated;
  std::vector<double> coef_control;
  // knn keeps the training units.
  ObservationalDataset memory;

  std::string name() const;
};

// Throws PreconditionError when ols2 or knn sees an empty treatment arm.
BaselineModel fit_baseline(BaselineKind kind, const ObservationalDataset& train, int k = 5);

EffectEstimates baseline_ite(const BaselineModel& model, const ObservationalDataset& data);

// Least squares with ridge jitter: argmin ||X b - y||^2 + jitter ||b||^2.
// `design` is row-major with `cols` columns.
std::vector<double> solve_least_squares(const std::vector<double>& design, std::size_t cols,
                                        const std::vector<double>& y,
                                        double jitter = kRidgeJitter);

}  // namespace nester

#endif  // NESTER_BASELINES_HPP_
