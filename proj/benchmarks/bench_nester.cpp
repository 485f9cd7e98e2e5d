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

#include <benchmark/benchmark.h>

#include <random>

#include "nester/data.hpp"
#include "nester/dsl.hpp"
#include "nester/interp.hpp"
#include "nester/synth.hpp"
#include "nester/train.hpp"

namespace {

using namespace nester;

Ast nested_program() {
  return ast::ite(ast::subset(ast::input(), 0, 1), ast::transform(ast::input()),
                  ast::add(ast::subset(ast::input(), 0, 11), ast::constant()));
}

Matrix random_inputs(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0, 1);
  Matrix m(rows, cols);
  for (double& v : m.data) v = gauss(rng);
  return m;
}

void BM_Forward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const Ast p = nested_program();
  const ParamStore params = init_params(p, 11, width, 0);
  const CompiledProgram compiled(p, params, 11);
  const EvalContext ctx = EvalContext::identity(11);
  const Matrix x = random_inputs(256, 11);
  Tape tape;
  std::size_t row = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compiled.forward(params.values, x.row(row), ctx, tape));
    row = (row + 1) % x.rows;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(16)->Arg(32);

void BM_ForwardBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const Ast p = nested_program();
  const ParamStore params = init_params(p, 11, width, 0);
  const CompiledProgram compiled(p, params, 11);
  const EvalContext ctx = EvalContext::identity(11);
  const Matrix x = random_inputs(256, 11);
  std::vector<double> grad(compiled.param_count());
  Tape tape;
  std::size_t row = 0;
  for (auto _ : state) {
    const double out = compiled.forward(params.values, x.row(row), ctx, tape);
    compiled.backward(params.values, x.row(row), ctx, tape, out, grad);
    benchmark::DoNotOptimize(grad.data());
    row = (row + 1) % x.rows;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(16)->Arg(32);

void BM_FitEpochs(benchmark::State& state) {
  const ObservationalDataset data = gen_twins_style(static_cast<std::size_t>(state.range(0)), 10, 3);
  const Splits s = split(data, {});
  const RegressionData train = to_regression(s.train), valid = to_regression(s.valid);
  const Standardization st = standardization_stats(s.train);
  EvalContext ctx;
  ctx.mu = st.mu;
  ctx.sigma = st.sigma;
  ctx.input_dim = 11;
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 64;
  cfg.head_width = 16;
  const Ast p = ast::transform(ast::input());
  for (auto _ : state) benchmark::DoNotOptimize(fit_regression(p, train, valid, cfg, ctx).valid_loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(train.size()) * cfg.epochs);
}
BENCHMARK(BM_FitEpochs)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Heuristic(benchmark::State& state) {
  const ObservationalDataset data = gen_twins_style(1000, 10, 4);
  const Splits s = split(data, {});
  const RegressionData train = to_regression(s.train), valid = to_regression(s.valid);
  const EvalContext ctx = EvalContext::identity(11);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 64;
  cfg.head_width = 16;
  const Ast partial = ast::ite(ast::hole(Sort::kReal, 0), ast::hole(Sort::kReal, 1), ast::constant());
  for (auto _ : state) benchmark::DoNotOptimize(heuristic(partial, train, valid, cfg, ctx));
}
BENCHMARK(BM_Heuristic)->Unit(benchmark::kMillisecond);

void BM_Parse(benchmark::State& state) {
  const Grammar g = default_grammar(26);
  const std::string text = "if subset(v,[0..1]) then transform(v,mu,sigma) else subset(v,[0..26])";
  for (auto _ : state) benchmark::DoNotOptimize(parse(text, g));
}
BENCHMARK(BM_Parse);

}  // namespace

BENCHMARK_MAIN();
