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

#ifndef NESTER_CAUSAL_HPP_
#define NESTER_CAUSAL_HPP_

#include <optional>
#include <span>
#include <vector>

#include "nester/data.hpp"
#include "nester/dsl.hpp"
#include "nester/interp.hpp"

namespace nester {

struct EffectEstimates {
  std::vector<double> ite;
  double ate = 0.0;
};

// ate = mean(ite).
EffectEstimates make_estimates(std::vector<double> ite);

// f(x, 1) - f(x, 0) per unit, overwriting the treatment slot v[0] on a copy
// of the inputs.
EffectEstimates predict_ite(const Ast& program, const ParamStore& params,
                            const ObservationalDataset& data, const EvalContext& ctx);

// |mean(ite) - mean(y1 - y0)|
double eps_ate(const EffectEstimates& est, std::span<const double> y1, std::span<const double> y0);

// mean((ite - (y1 - y0))^2); report the square root.
double eps_pehe(const EffectEstimates& est, std::span<const double> y1, std::span<const double> y0);

// mean_{T} y - mean_{U and E} y
double att_true(std::span<const double> y, std::span<const std::uint8_t> treated,
                std::span<const std::uint8_t> control, std::span<const std::uint8_t> randomized);

// |att_true - mean_{T} ite|. Throws PreconditionError when T or U and E is
// empty.
double eps_att(const EffectEstimates& est, std::span<const double> y,
               std::span<const std::uint8_t> treated, std::span<const std::uint8_t> control,
               std::span<const std::uint8_t> randomized);

enum class Scope { kInSample, kOutSample };

struct MetricReport {
  std::optional<double> eps_ate;
  std::optional<double> sqrt_eps_pehe;
  std::optional<double> eps_att;
  Scope scope = Scope::kOutSample;
  bool biased_in_sample = false;
};

// Fills eps_ate and sqrt_eps_pehe when potential outcomes exist, and eps_att
// when mask "E" exists (T and U default to t == 1 and t == 0).
MetricReport evaluate_metrics(const EffectEstimates& est, const ObservationalDataset& data,
                              Scope scope);

}  // namespace nester

#endif  // NESTER_CAUSAL_HPP_
