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

#include "nester/error.hpp"
#include "nester/interp.hpp"
#include "test_util.hpp"

namespace nester {
namespace {

TEST(SmoothIte, ZeroConditionAveragesBranches) {
  for (double beta : {0.1, 1.0, 5.0, 100.0}) EXPECT_DOUBLE_EQ(smooth_ite(0.0, 5.0, 3.0, beta), 4.0);
}

TEST(SmoothIte, LargeTemperatureApproachesHardBranch) {
  EXPECT_NEAR(smooth_ite(1.0, 5.0, 3.0, 100.0), 5.0, 1e-6);
  EXPECT_NEAR(smooth_ite(-2.0, 5.0, 3.0, 100.0), 3.0, 1e-6);
}

TEST(SmoothIte, RejectsNonFiniteInputs) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(smooth_ite(std::nan(""), 1, 2, 5), NumericError);
  EXPECT_THROW(smooth_ite(0, inf, 2, 5), NumericError);
  EXPECT_THROW(smooth_ite(0, 1, 2, 0), NumericError);
}

TEST(SmoothIte, StaysWithinBranchHull) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_real_distribution<double> b(0.01, 50);
  for (int i = 0; i < 10000; ++i) {
    const double c = u(rng), x = u(rng), y = u(rng), beta = b(rng);
    const double out = smooth_ite(c, x, y, beta);
    EXPECT_GE(out, std::min(x, y) - 1e-12);
    EXPECT_LE(out, std::max(x, y) + 1e-12);
  }
}

TEST(SmoothIte, DistanceToHardBranchShrinksWithTemperature) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 2000; ++i) {
    const double c = u(rng), x = u(rng), y = u(rng);
    if (c == 0.0) continue;
    const double hard = c > 0 ? x : y;
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 5.0, 25.0, 125.0}) {
      const double gap = std::abs(smooth_ite(c, x, y, beta) - hard);
      // |f - hard| = |x - y| * sigmoid(-beta*|c|) exactly.
      EXPECT_NEAR(gap, std::abs(x - y) / (1.0 + std::exp(beta * std::abs(c))), 1e-12);
      EXPECT_LE(gap, prev + 1e-15);
      prev = gap;
    }
  }
}

TEST(Sigmoid, IsStableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(-40.0), std::exp(-40.0), 1e-30);
}

TEST(Transform, InputAtMeanWithZeroHeadGivesZero) {
  EvalContext ctx;
  ctx.mu = {1.0, -2.0, 3.0};
  ctx.sigma = {2.0, 1.0, 0.5};
  ctx.input_dim = 3;
  const std::vector<double> params(head_param_count(3, 0), 0.0);
  const MlpHead head{3, 0, params};
  EXPECT_DOUBLE_EQ(transform_op(ctx.mu, ctx, head), 0.0);
}

TEST(Transform, StandardizesBeforeTheHead) {
  EvalContext ctx;
  ctx.mu = {1.0, -2.0};
  ctx.sigma = {2.0, 4.0};
  ctx.input_dim = 2;
  const std::vector<double> params = {1.0, 1.0, 0.5};  // affine head
  const MlpHead head{2, 0, params};
  const std::vector<double> v = {5.0, 2.0};
  EXPECT_DOUBLE_EQ(transform_op(v, ctx, head), 2.0 + 1.0 + 0.5);
}

TEST(Transform, FlooredSigmaStaysFinite) {
  EvalContext ctx;
  ctx.mu = {7.0};
  ctx.sigma = {kSigmaFloor};
  ctx.input_dim = 1;
  const std::vector<double> params = {1.0, 0.0};
  const MlpHead head{1, 0, params};
  const std::vector<double> v = {8.0};
  const double out = transform_op(v, ctx, head);
  EXPECT_TRUE(std::isfinite(out));
  EXPECT_DOUBLE_EQ(out, 1.0 / kSigmaFloor);
  ctx.sigma = {1e-9};
  EXPECT_THROW(ctx.validate(), BoundsError);
}

TEST(Subset, MasksPositionsOutsideTheRange) {
  // Head sums its inputs with weights 1, 10, 100, so the output shows the mask.
  const std::vector<double> params = {1.0, 10.0, 100.0, 0.0};
  const MlpHead head{3, 0, params};
  const std::vector<double> v = {1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(subset_op(v, 0, 2, head), 1.0 + 20.0);
  EXPECT_DOUBLE_EQ(subset_op(v, 0, 3, head), head(v));
  EXPECT_DOUBLE_EQ(subset_op(v, 1, 2, head), 20.0);
  EXPECT_THROW(subset_op(v, 0, 4, head), BoundsError);
}

TEST(MlpHead, HiddenLayerUsesTanh) {
  // W1 = [1, -1], b1 = 0.5, w2 = 2, b2 = -1.
  const std::vector<double> params = {1.0, -1.0, 0.5, 2.0, -1.0};
  const MlpHead head{2, 1, params};
  const std::vector<double> x = {0.3, 0.1};
  EXPECT_NEAR(head(x), 2.0 * std::tanh(0.3 - 0.1 + 0.5) - 1.0, 1e-14);
  EXPECT_EQ(head_param_count(4, 3), 4u * 3 + 3 + 3 + 1);
}

TEST(Eval, ConstantProgramIsItsParameter) {
  const Ast p = ast::constant();
  ParamStore params = init_params(p, 3, 4, 1);
  ASSERT_EQ(params.size(), 1u);
  params.slot("r")[0] = 2.5;
  const EvalContext ctx = EvalContext::identity(3);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Matrix m = testing::random_matrix(1, 3, rng, -50, 50);
    EXPECT_DOUBLE_EQ(eval(p, params, m.row(0), ctx), 2.5);
  }
}

TEST(Eval, AddOfConstants) {
  const Ast p = ast::add(ast::constant(), ast::constant());
  ParamStore params = init_params(p, 2, 4, 1);
  auto theta = params.slot("r");
  theta[0] = 1;
  theta[1] = 1;
  theta[2] = 0;
  params.slot("r.0")[0] = 2.0;
  params.slot("r.1")[0] = 3.0;
  const std::vector<double> v = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(eval(p, params, v, EvalContext::identity(2)), 5.0);
}

TEST(Eval, MulOfConstants) {
  const Ast p = ast::mul(ast::constant(), ast::constant());
  ParamStore params = init_params(p, 2, 4, 1);
  params.slot("r")[0] = 0.5;
  params.slot("r.0")[0] = 3.0;
  params.slot("r.1")[0] = 4.0;
  const std::vector<double> v = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(eval(p, params, v, EvalContext::identity(2)), 6.0);
}

// The XOR program with hard-coded affine weights, as
// if A[1,1;0](x) then (if A[1,1;-1](x) then A[0,0;0](x) else A[1,1;0](x)) else A[0,0;0](x).
struct XorFixture {
  Ast program;
  ParamStore params;
};

XorFixture xor_fixture() {
  const auto affine = [] { return ast::subset(ast::input(), 0, 2); };
  XorFixture f;
  f.program = ast::ite(affine(), ast::ite(affine(), affine(), affine()), affine());
  f.params = init_params(f.program, 2, 0, 0);
  const auto set = [&](const std::string& path, std::vector<double> w) {
    auto s = f.params.slot(path);
    std::copy(w.begin(), w.end(), s.begin());
  };
  set("r.0", {1, 1, 0});
  set("r.1.0", {1, 1, -1});
  set("r.1.1", {0, 0, 0});
  set("r.1.2", {1, 1, 0});
  set("r.2", {0, 0, 0});
  return f;
}

// Right-hand column of the XOR table written out directly.
double xor_closed_form(double x1, double x2, double beta) {
  const auto s = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double outer = s(beta * (x1 + x2));
  const double inner = s(beta * (x1 + x2 - 1));
  return outer * (inner * 0.0 + (1 - inner) * (x1 + x2)) + (1 - outer) * 0.0;
}

TEST(Eval, XorProgramMatchesItsClosedForm) {
  const XorFixture f = xor_fixture();
  for (double beta : {1.0, 10.0, 100.0}) {
    const EvalContext ctx = EvalContext::identity(2, beta);
    for (double x1 : {0.0, 1.0}) {
      for (double x2 : {0.0, 1.0}) {
        const std::vector<double> v = {x1, x2};
        EXPECT_NEAR(eval(f.program, f.params, v, ctx), xor_closed_form(x1, x2, beta), 1e-12);
      }
    }
  }
}

TEST(Eval, XorMixedInputsSitOnTheInnerBoundary) {
  // With the printed weights the inner condition is exactly 0 on (0,1) and
  // (1,0), so the gate averages 0 and 1 whatever beta is.
  const XorFixture f = xor_fixture();
  const EvalContext ctx = EvalContext::identity(2, 10.0);
  const std::vector<double> v01 = {0.0, 1.0};
  const std::vector<double> v11 = {1.0, 1.0};
  const std::vector<double> v00 = {0.0, 0.0};
  EXPECT_NEAR(eval(f.program, f.params, v01, ctx), 0.5 / (1 + std::exp(-10.0)), 1e-12);
  EXPECT_NEAR(eval(f.program, f.params, v00, ctx), 0.0, 1e-12);
  EXPECT_NEAR(eval(f.program, f.params, v11, ctx), 2.0 / (1 + std::exp(10.0)) / (1 + std::exp(-20.0)),
              1e-12);
}

TEST(Eval, RejectsIncompleteProgramsAndBadInputs) {
  const Ast p = ast::transform(ast::input());
  const ParamStore params = init_params(p, 2, 3, 0);
  const std::vector<double> short_v = {1.0};
  EXPECT_THROW(eval(p, params, short_v, EvalContext::identity(2)), DimensionError);
  const std::vector<double> nan_v = {1.0, std::nan("")};
  EXPECT_THROW(eval(p, params, nan_v, EvalContext::identity(2)), NumericError);
  const Ast partial = ast::ite(ast::hole(Sort::kReal, 0), ast::constant(), ast::constant());
  EXPECT_THROW(CompiledProgram(partial, params, 2), PreconditionError);
  EXPECT_THROW(CompiledProgram(ast::subset(ast::input(), 0, 5), init_params(ast::subset(ast::input(), 0, 5), 2, 3, 0), 2),
               BoundsError);
  // A layout from a different program does not fit.
  EXPECT_THROW(CompiledProgram(ast::constant(), params, 2), DimensionError);
}

TEST(Params, InitIsSeededPerNodePath) {
  const Ast p = ast::ite(ast::transform(ast::input()), ast::constant(), ast::subset(ast::input(), 0, 2));
  const ParamStore a = init_params(p, 3, 5, 42);
  const ParamStore b = init_params(p, 3, 5, 42);
  const ParamStore c = init_params(p, 3, 5, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.layout.size(), 3u);
  EXPECT_EQ(a.layout.at("r.0").length, head_param_count(3, 5));
  EXPECT_EQ(a.layout.at("r.1").length, 1u);
  // The same subtree at the same path gets the same initial weights in a different program.
  const Ast q = ast::ite(ast::transform(ast::input()), ast::constant(), ast::constant());
  const ParamStore d = init_params(q, 3, 5, 42);
  const auto sa = a.slot("r.0");
  const auto sd = d.slot("r.0");
  EXPECT_TRUE(std::equal(sa.begin(), sa.end(), sd.begin(), sd.end()));
  for (double w : a.values) EXPECT_LE(std::abs(w), 1.0);
}

TEST(Gradient, MeanSquaredLossMatchesFiniteDifferences) {
  const Ast p = ast::ite(ast::transform(ast::input()), ast::subset(ast::input(), 0, 1),
                         ast::mul(ast::constant(), ast::subset(ast::input(), 1, 3)));
  const ParamStore params = init_params(p, 3, 4, 9);
  std::mt19937_64 rng(10);
  const Matrix x = testing::random_matrix(16, 3, rng);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < x.rows; ++i) batch.push_back({x.row(i), 0.0});
  EvalContext ctx = EvalContext::identity(3);
  ctx.mu = {0.1, -0.2, 0.3};
  ctx.sigma = {0.9, 1.1, 2.0};
  // Zero targets: the loss is the mean of squared predictions.
  const CompiledProgram compiled(p, params, 3);
  const std::vector<double> preds = predict(compiled, params.values, x, ctx);
  double expected = 0.0;
  for (double v : preds) expected += v * v;
  EXPECT_NEAR(grad(p, params, batch, ctx).loss, expected / 16.0, 1e-12);
  const auto check = testing::check_gradient(p, params, batch, ctx);
  EXPECT_EQ(check.failures, 0u) << "worst relative error " << check.worst_relative;
}

TEST(Gradient, RandomProgramsMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + trial % 5;
    const Grammar g = default_grammar(d, {}, {AlgebraicTag::kAdd, AlgebraicTag::kMul});
    const Ast p = testing::random_program(g, 3, rng);
    const ParamStore params = init_params(p, d, 3, static_cast<std::uint64_t>(trial));
    const Matrix x = testing::random_matrix(6, static_cast<std::size_t>(d), rng);
    std::vector<Sample> batch;
    std::normal_distribution<double> gauss(0, 1);
    for (std::size_t i = 0; i < x.rows; ++i) batch.push_back({x.row(i), gauss(rng)});
    const auto check = testing::check_gradient(p, params, batch, EvalContext::identity(d));
    EXPECT_EQ(check.failures, 0u) << render(p) << " worst " << check.worst_relative;
  }
}

TEST(Gradient, MimicExpressionMatchesFiniteDifferences) {
  const Ast p = build_nn_expression(3, 2, Activation::kSigmoid);
  const ParamStore params = init_params(p, 3, 0, 1);
  std::mt19937_64 rng(13);
  const Matrix x = testing::random_matrix(8, 3, rng);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < x.rows; ++i) batch.push_back({x.row(i), 0.5});
  const auto check = testing::check_gradient(p, params, batch, EvalContext::identity(3));
  EXPECT_EQ(check.failures, 0u) << check.worst_relative;
  EXPECT_THROW(grad(p, params, {}, EvalContext::identity(3)), PreconditionError);
}

}  // namespace
}  // namespace nester
