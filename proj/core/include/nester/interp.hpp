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

#ifndef NESTER_INTERP_HPP_
#define NESTER_INTERP_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nester/dsl.hpp"
#include "nester/matrix.hpp"

namespace nester {

inline constexpr double kSigmaFloor = 1e-6;

// Where one node's parameters live inside ParamStore::values.
struct ParamSlot {
  std::size_t offset = 0;
  std::size_t length = 0;
  // -1 for non-head nodes, 0 for an affine head, otherwise the tanh hidden
  // width of the MLP head.
  int head_width = -1;

  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

// Flat parameter vector of one program. Layout keys are node paths: "r" is
// the root and "r.1.0" the first child of the root's second child.
struct ParamStore {
  std::vector<double> values;
  std::map<std::string, ParamSlot> layout;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  std::span<double> slot(const std::string& path);
  std::span<const double> slot(const std::string& path) const;
};

struct EvalContext {
  std::vector<double> mu;
  std::vector<double> sigma;
  double beta = 5.0;
  int input_dim = 0;

  // mu = 0, sigma = 1.
  static EvalContext identity(int input_dim, double beta = 5.0);
  // Throws DimensionError/BoundsError when the invariants do not hold.
  void validate() const;
};

std::size_t head_param_count(int input_dim, int hidden_width);

// A read-only view of one head's parameters: W1 (width x dim, row major),
// b1 (width), w2 (width), b2. Width 0 degenerates to w (dim), b.
struct MlpHead {
  int input_dim = 0;
  int hidden_width = 0;
  std::span<const double> params;

  double operator()(std::span<const double> x) const;
};

double sigmoid(double z);

// sigmoid(beta*cond)*a + (1 - sigmoid(beta*cond))*b.
double smooth_ite(double cond, double a, double b, double beta);

// Standardizes v with (mu, sigma) and applies the head.
double transform_op(std::span<const double> v, const EvalContext& ctx, const MlpHead& head);

// Zeroes entries outside [begin, end) and applies the head.
double subset_op(std::span<const double> v, int begin, int end, const MlpHead& head);

// Builds the layout for every parameterized node and initializes values
// uniformly in +-1/sqrt(fan_in) from a seed derived from (seed, node path).
ParamStore init_params(const Ast& program, int input_dim, int head_width, std::uint64_t seed);

// Per-sample scratch for CompiledProgram. Reuse across calls to avoid
// allocation; one per thread.
struct Tape {
  std::vector<double> values;
  std::vector<double> adjoints;
  std::vector<double> scratch;
};

// A complete program flattened to preorder with resolved parameter offsets.
class CompiledProgram {
 public:
  // Throws PreconditionError for incomplete programs, and BoundsError or
  // DimensionError when the layout or bounds do not fit.
  CompiledProgram(const Ast& program, const ParamStore& params, int input_dim);

  std::size_t param_count() const { return param_count_; }
  int input_dim() const { return input_dim_; }

  double forward(std::span<const double> theta, std::span<const double> v,
                 const EvalContext& ctx, Tape& tape) const;
  // Accumulates d(adjoint * output)/d(theta) into `grad`, reusing the tape
  // of the last forward call on the same sample.
  void backward(std::span<const double> theta, std::span<const double> v, const EvalContext& ctx,
                Tape& tape, double adjoint, std::span<double> grad) const;

 private:
  struct Op {
    NodeKind kind;
    int child[3] = {-1, -1, -1};
    std::size_t param = 0;
    int width = -1;
    int lo = 0;
    int hi = 0;
    Activation act = Activation::kTanh;
    std::size_t scratch = 0;
  };

  double head_forward(const Op& op, std::span<const double> theta, const double* x,
                      double* hidden) const;
  void head_backward(const Op& op, std::span<const double> theta, const double* x,
                     const double* hidden, double adjoint, std::span<double> grad) const;

  std::vector<Op> ops_;
  std::size_t param_count_ = 0;
  std::size_t scratch_size_ = 0;
  int input_dim_ = 0;
};

// Evaluates a complete program on one input. Throws NumericError when the
// output is not finite.
double eval(const Ast& program, const ParamStore& params, std::span<const double> v,
            const EvalContext& ctx);

struct Sample {
  std::span<const double> v;
  double y = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Mean squared error over `batch` and its exact gradient with respect to all
// parameters.
LossGrad grad(const Ast& program, const ParamStore& params, std::span<const Sample> batch,
              const EvalContext& ctx);

// Predictions for every row of `inputs`.
std::vector<double> predict(const CompiledProgram& program, std::span<const double> theta,
                            const Matrix& inputs, const EvalContext& ctx);

}  // namespace nester

#endif  // NESTER_INTERP_HPP_
