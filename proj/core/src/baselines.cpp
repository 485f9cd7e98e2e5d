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

#include "nester/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>

#include "nester/error.hpp"

namespace nester {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> fit_arm(const ObservationalDataset& data, double arm) {
  std::vector<double> design, y;
  const std::size_t cols = data.dim() + 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.t[i] != arm) continue;
    design.push_back(1.0);
    for (std::size_t k = 0; k < data.dim(); ++k) design.push_back(data.x(i, k));
    y.push_back(data.y[i]);
  }
  if (y.empty()) {
    throw PreconditionError(std::string("ols2 needs a non-empty ") +
                            (arm == 1.0 ? "treated" : "control") + " arm");
  }
  return solve_least_squares(design, cols, y);
}

double dot_row(const std::vector<double>& coef, std::size_t offset, std::span<const double> x) {
  double out = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) out += coef[offset + k] * x[k];
  return out;
}

// Mean outcome of the k nearest units of one arm; ties go to the lower index.
double knn_mean(const ObservationalDataset& memory, std::span<const double> x, double arm, int k) {
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t j = 0; j < memory.size(); ++j) {
    if (memory.t[j] != arm) continue;
    double d2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double diff = memory.x(j, c) - x[c];
      d2 += diff * diff;
    }
    dist.emplace_back(d2, j);
  }
  if (dist.empty()) {
    throw PreconditionError(std::string("k-NN has no ") + (arm == 1.0 ? "treated" : "control") +
                            " neighbours");
  }
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += memory.y[dist[i].second];
  return sum / static_cast<double>(take);
}

}  // namespace

std::string BaselineModel::name() const {
  switch (kind) {
    case BaselineKind::kOls1:
      return "ols1";
    case BaselineKind::kOls2:
      return "ols2";
    case BaselineKind::kKnn:
      return "knn" + std::to_string(k);
  }
  return "unknown";
}

std::vector<double> solve_least_squares(const std::vector<double>& design, std::size_t cols,
                                        const std::vector<double>& y, double jitter) {
  if (cols == 0 || design.size() != y.size() * cols) {
    throw DimensionError("least squares design does not match the targets");
  }
  const Eigen::Map<const RowMajor> x(design.data(), static_cast<Eigen::Index>(y.size()),
                                     static_cast<Eigen::Index>(cols));
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::MatrixXd normal = x.transpose() * x;
  normal.diagonal().array() += jitter;
  const Eigen::VectorXd beta = normal.ldlt().solve(x.transpose() * target);
  return {beta.data(), beta.data() + beta.size()};
}

BaselineModel fit_baseline(BaselineKind kind, const ObservationalDataset& train, int k) {
  if (train.size() == 0) throw PreconditionError("baseline needs training units");
  BaselineModel model;
  model.kind = kind;
  model.k = k;
  switch (kind) {
    case BaselineKind::kOls1: {
      const std::size_t cols = train.dim() + 2;
      std::vector<double> design;
      design.reserve(train.size() * cols);
      for (std::size_t i = 0; i < train.size(); ++i) {
        design.push_back(1.0);
        design.push_back(train.t[i]);
        for (std::size_t c = 0; c < train.dim(); ++c) design.push_back(train.x(i, c));
      }
      model.coef = solve_least_squares(design, cols, train.y);
      break;
    }
    case BaselineKind::kOls2:
      model.coef_treated = fit_arm(train, 1.0);
      model.coef_control = fit_arm(train, 0.0);
      break;
    case BaselineKind::kKnn:
      if (k < 1) throw PreconditionError("k-NN needs k >= 1");
      if (std::none_of(train.t.begin(), train.t.end(), [](double t) { return t == 1.0; }) ||
          std::none_of(train.t.begin(), train.t.end(), [](double t) { return t == 0.0; })) {
        throw PreconditionError("k-NN needs treated and control training units");
      }
      model.memory = train;
      break;
  }
  return model;
}

EffectEstimates baseline_ite(const BaselineModel& model, const ObservationalDataset& data) {
  std::vector<double> ite(data.size());
  switch (model.kind) {
    case BaselineKind::kOls1:
      if (model.coef.size() != data.dim() + 2) throw DimensionError("ols1 model dimension mismatch");
      std::fill(ite.begin(), ite.end(), model.coef[1]);
      break;
    case BaselineKind::kOls2:
      if (model.coef_treated.size() != data.dim() + 1) {
        throw DimensionError("ols2 model dimension mismatch");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.x.row(i);
        ite[i] = (model.coef_treated[0] + dot_row(model.coef_treated, 1, x)) -
                 (model.coef_control[0] + dot_row(model.coef_control, 1, x));
      }
      break;
    case BaselineKind::kKnn:
      if (model.memory.dim() != data.dim()) throw DimensionError("k-NN model dimension mismatch");
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.x.row(i);
        ite[i] = knn_mean(model.memory, x, 1.0, model.k) - knn_mean(model.memory, x, 0.0, model.k);
      }
      break;
  }
  return make_estimates(std::move(ite));
}

}  // namespace nester
