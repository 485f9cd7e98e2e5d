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

#include "nester/causal.hpp"

#include <cmath>
#include <numeric>

#include "nester/error.hpp"

namespace nester {
namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c || a == 0) {
    throw DimensionError("metric inputs need equal non-zero lengths (" + std::to_string(a) + ", " +
                         std::to_string(b) + ", " + std::to_string(c) + ")");
  }
}

}  // namespace

EffectEstimates make_estimates(std::vector<double> ite) {
  EffectEstimates est;
  est.ite = std::move(ite);
  est.ate = est.ite.empty() ? 0.0
                            : std::accumulate(est.ite.begin(), est.ite.end(), 0.0) /
                                  static_cast<double>(est.ite.size());
  return est;
}

EffectEstimates predict_ite(const Ast& program, const ParamStore& params,
                            const ObservationalDataset& data, const EvalContext& ctx) {
  if (data.dim() + 1 != static_cast<std::size_t>(ctx.input_dim)) {
    throw DimensionError("dataset has " + std::to_string(data.dim()) +
                         " covariates but the program expects " + std::to_string(ctx.input_dim - 1));
  }
  const CompiledProgram compiled(program, params, ctx.input_dim);
  const auto treated = predict(compiled, params.values, data.inputs_with_treatment(1.0), ctx);
  const auto control = predict(compiled, params.values, data.inputs_with_treatment(0.0), ctx);
  std::vector<double> ite(treated.size());
  for (std::size_t i = 0; i < ite.size(); ++i) ite[i] = treated[i] - control[i];
  return make_estimates(std::move(ite));
}

double eps_ate(const EffectEstimates& est, std::span<const double> y1, std::span<const double> y0) {
  check_lengths(est.ite.size(), y1.size(), y0.size());
  double truth = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) truth += y1[i] - y0[i];
  truth /= static_cast<double>(y1.size());
  const double estimate =
      std::accumulate(est.ite.begin(), est.ite.end(), 0.0) / static_cast<double>(est.ite.size());
  return std::abs(estimate - truth);
}

double eps_pehe(const EffectEstimates& est, std::span<const double> y1, std::span<const double> y0) {
  check_lengths(est.ite.size(), y1.size(), y0.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    const double e = est.ite[i] - (y1[i] - y0[i]);
    total += e * e;
  }
  return total / static_cast<double>(y1.size());
}

double att_true(std::span<const double> y, std::span<const std::uint8_t> treated,
                std::span<const std::uint8_t> control, std::span<const std::uint8_t> randomized) {
  if (treated.size() != y.size() || control.size() != y.size() || randomized.size() != y.size()) {
    throw DimensionError("masks must have one entry per unit");
  }
  double sum_t = 0.0, sum_c = 0.0;
  std::size_t n_t = 0, n_c = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (treated[i]) {
      sum_t += y[i];
      ++n_t;
    }
    if (control[i] && randomized[i]) {
      sum_c += y[i];
      ++n_c;
    }
  }
  if (n_t == 0) throw PreconditionError("treated group T is empty");
  if (n_c == 0) throw PreconditionError("randomized control group U and E is empty");
  return sum_t / static_cast<double>(n_t) - sum_c / static_cast<double>(n_c);
}

double eps_att(const EffectEstimates& est, std::span<const double> y,
               std::span<const std::uint8_t> treated, std::span<const std::uint8_t> control,
               std::span<const std::uint8_t> randomized) {
  if (est.ite.size() != y.size()) throw DimensionError("estimates and outcomes differ in length");
  const double truth = att_true(y, treated, control, randomized);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (treated[i]) {
      sum += est.ite[i];
      ++n;
    }
  }
  return std::abs(truth - sum / static_cast<double>(n));
}

MetricReport evaluate_metrics(const EffectEstimates& est, const ObservationalDataset& data,
                              Scope scope) {
  MetricReport report;
  report.scope = scope;
  if (data.has_potential_outcomes()) {
    report.eps_ate = eps_ate(est, *data.y1, *data.y0);
    report.sqrt_eps_pehe = std::sqrt(eps_pehe(est, *data.y1, *data.y0));
  }
  const auto e = data.masks.find("E");
  if (e != data.masks.end()) {
    Mask treated(data.size()), control(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      treated[i] = data.t[i] == 1.0;
      control[i] = data.t[i] == 0.0;
    }
    if (const auto it = data.masks.find("T"); it != data.masks.end()) treated = it->second;
    if (const auto it = data.masks.find("U"); it != data.masks.end()) control = it->second;
    bool any_t = false, any_c = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      any_t = any_t || treated[i];
      any_c = any_c || (control[i] && e->second[i]);
    }
    if (any_t && any_c) report.eps_att = eps_att(est, data.y, treated, control, e->second);
  }
  return report;
}

}  // namespace nester
