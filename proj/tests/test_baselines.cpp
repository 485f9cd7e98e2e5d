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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nester/baselines.hpp"
#include "nester/error.hpp"
#include "test_util.hpp"

namespace nester {
namespace {

// y = 2t + 1 with covariates that carry no signal.
ObservationalDataset two_t_plus_one(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0, 1);
  ObservationalDataset d;
  d.x = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    d.x(i, 0) = gauss(rng);
    d.x(i, 1) = gauss(rng);
    d.t.push_back(i % 2 == 0 ? 1.0 : 0.0);
    d.y.push_back(2.0 * d.t.back() + 1.0);
  }
  return d;
}

TEST(Ols1, RecoversTreatmentCoefficient) {
  const auto d = two_t_plus_one(50, 1);
  const BaselineModel m = fit_baseline(BaselineKind::kOls1, d);
  ASSERT_EQ(m.coef.size(), 4u);
  EXPECT_NEAR(m.coef[0], 1.0, 1e-6);
  EXPECT_NEAR(m.coef[1], 2.0, 1e-6);
  const EffectEstimates est = baseline_ite(m, d);
  for (double v : est.ite) EXPECT_NEAR(v, 2.0, 1e-6);
  EXPECT_EQ(m.name(), "ols1");
}

TEST(Ols2, ArmInterceptsDifferByTheEffect) {
  const auto d = two_t_plus_one(50, 2);
  const BaselineModel m = fit_baseline(BaselineKind::kOls2, d);
  EXPECT_NEAR(m.coef_treated[0] - m.coef_control[0], 2.0, 1e-6);
  for (double v : baseline_ite(m, d).ite) EXPECT_NEAR(v, 2.0, 1e-6);
}

TEST(Ols1, ResidualsAreOrthogonalToTheDesign) {
  const auto d = testing::linear_dataset(200, 4, 1.5, 3, 0.5);
  const BaselineModel m = fit_baseline(BaselineKind::kOls1, d);
  const Matrix in = d.inputs();
  std::vector<double> resid(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double pred = m.coef[0];
    for (std::size_t k = 0; k < in.cols; ++k) pred += m.coef[k + 1] * in(i, k);
    resid[i] = d.y[i] - pred;
  }
  for (std::size_t k = 0; k <= in.cols; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) dot += resid[i] * (k == 0 ? 1.0 : in(i, k - 1));
    EXPECT_NEAR(dot, 0.0, 1e-6);
  }
}

TEST(LeastSquares, SolvesSmallSystemsAndChecksShapes) {
  // Design [1, x] for x = 0, 1, 2 and y = 1 + 3x.
  const std::vector<double> design = {1, 0, 1, 1, 1, 2};
  const std::vector<double> y = {1, 4, 7};
  const auto beta = solve_least_squares(design, 2, y);
  EXPECT_NEAR(beta[0], 1.0, 1e-6);
  EXPECT_NEAR(beta[1], 3.0, 1e-6);
  EXPECT_THROW(solve_least_squares(design, 2, {1, 2}), DimensionError);
}

TEST(LeastSquares, CollinearDesignStaysFinite) {
  const std::vector<double> design = {1, 1, 1, 1, 1, 1};
  const std::vector<double> y = {2, 2, 2};
  const auto beta = solve_least_squares(design, 2, y);
  EXPECT_TRUE(std::isfinite(beta[0]) && std::isfinite(beta[1]));
  EXPECT_NEAR(beta[0] + beta[1], 2.0, 1e-6);
}

TEST(Knn, DuplicateAcrossArmsGivesOutcomeDifference) {
  ObservationalDataset d;
  d.x = Matrix(2, 1);
  d.x(0, 0) = 0.5;
  d.x(1, 0) = 0.5;
  d.t = {1.0, 0.0};
  d.y = {4.0, 1.5};
  const BaselineModel m = fit_baseline(BaselineKind::kKnn, d, 1);
  const EffectEstimates est = baseline_ite(m, d);
  EXPECT_DOUBLE_EQ(est.ite[0], 2.5);
  EXPECT_DOUBLE_EQ(est.ite[1], 2.5);
  EXPECT_EQ(m.name(), "knn1");
}

TEST(Knn, TiesGoToTheLowestIndex) {
  ObservationalDataset d;
  d.x = Matrix(3, 1);
  d.x(0, 0) = 0.0;
  d.x(1, 0) = -1.0;
  d.x(2, 0) = 1.0;
  d.t = {1.0, 0.0, 0.0};
  d.y = {10.0, 1.0, 2.0};
  const BaselineModel m = fit_baseline(BaselineKind::kKnn, d, 1);
  // Unit 0 is equidistant from units 1 and 2; unit 1 wins.
  EXPECT_DOUBLE_EQ(baseline_ite(m, d).ite[0], 9.0);
}

TEST(Knn, InSampleEstimateKeepsTheFactualOutcome) {
  // With k=1 each unit is its own nearest neighbour in its arm, so the
  // factual side of the estimate is the observed outcome.
  const auto d = testing::linear_dataset(40, 2, 2.0, 5, 1.0);
  const BaselineModel m = fit_baseline(BaselineKind::kKnn, d, 1);
  const EffectEstimates est = baseline_ite(m, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    double match = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (d.t[j] == d.t[i]) continue;
      double dist = 0.0;
      for (std::size_t k = 0; k < d.dim(); ++k) dist += std::pow(d.x(i, k) - d.x(j, k), 2);
      if (dist < best) {
        best = dist;
        match = d.y[j];
      }
    }
    const double expected = d.t[i] == 1.0 ? d.y[i] - match : match - d.y[i];
    EXPECT_DOUBLE_EQ(est.ite[i], expected) << "unit " << i;
  }
}

TEST(Baselines, Preconditions) {
  auto d = two_t_plus_one(10, 1);
  std::fill(d.t.begin(), d.t.end(), 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) d.y[i] = 3.0;
  EXPECT_THROW(fit_baseline(BaselineKind::kOls2, d), PreconditionError);
  EXPECT_THROW(fit_baseline(BaselineKind::kKnn, d, 1), PreconditionError);
  EXPECT_THROW(fit_baseline(BaselineKind::kKnn, two_t_plus_one(10, 1), 0), PreconditionError);
  const BaselineModel m = fit_baseline(BaselineKind::kOls1, two_t_plus_one(10, 1));
  ObservationalDataset wide;
  wide.x = Matrix(2, 5);
  wide.t = {0, 1};
  wide.y = {0, 1};
  EXPECT_THROW(baseline_ite(m, wide), DimensionError);
}

}  // namespace
}  // namespace nester
