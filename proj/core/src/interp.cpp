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

#include "nester/interp.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "nester/error.hpp"
#include "nester/seed.hpp"

namespace nester {

std::span<double> ParamStore::slot(const std::string& path) {
  const ParamSlot& s = layout.at(path);
  return {values.data() + s.offset, s.length};
}

std::span<const double> ParamStore::slot(const std::string& path) const {
  const ParamSlot& s = layout.at(path);
  return {values.data() + s.offset, s.length};
}

EvalContext EvalContext::identity(int input_dim, double beta) {
  EvalContext ctx;
  ctx.mu.assign(static_cast<std::size_t>(input_dim), 0.0);
  ctx.sigma.assign(static_cast<std::size_t>(input_dim), 1.0);
  ctx.beta = beta;
  ctx.input_dim = input_dim;
  return ctx;
}

void EvalContext::validate() const {
  const auto d = static_cast<std::size_t>(input_dim);
  if (input_dim < 1 || mu.size() != d || sigma.size() != d) {
    throw DimensionError("evaluation context needs mu and sigma of length input_dim=" +
                         std::to_string(input_dim));
  }
  for (double s : sigma) {
    if (!(s >= kSigmaFloor)) throw BoundsError("sigma entries must be at least the 1e-6 floor");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw BoundsError("beta must be positive and finite");
}

std::size_t head_param_count(int input_dim, int hidden_width) {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto w = static_cast<std::size_t>(hidden_width);
  if (hidden_width == 0) return d + 1;
  return d * w + w + w + 1;
}

double MlpHead::operator()(std::span<const double> x) const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto w = static_cast<std::size_t>(hidden_width);
  if (x.size() != d) throw DimensionError("head input has wrong dimension");
  if (params.size() != head_param_count(input_dim, hidden_width)) {
    throw DimensionError("head parameter count does not match its shape");
  }
  if (w == 0) {
    double out = params[d];
    for (std::size_t k = 0; k < d; ++k) out += params[k] * x[k];
    return out;
  }
  const double* b1 = params.data() + w * d;
  const double* w2 = b1 + w;
  double out = w2[w];
  for (std::size_t j = 0; j < w; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d; ++k) z += params[j * d + k] * x[k];
    out += w2[j] * std::tanh(z);
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double smooth_ite(double cond, double a, double b, double beta) {
  if (!std::isfinite(cond) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(beta)) {
    throw NumericError("smooth if-then-else received a non-finite input");
  }
  if (beta <= 0) throw NumericError("temperature beta must be positive");
  const double s = sigmoid(beta * cond);
  return s * a + (1.0 - s) * b;
}

double transform_op(std::span<const double> v, const EvalContext& ctx, const MlpHead& head) {
  if (v.size() != static_cast<std::size_t>(ctx.input_dim) || ctx.mu.size() != v.size() ||
      ctx.sigma.size() != v.size()) {
    throw DimensionError("transform input has dimension " + std::to_string(v.size()) +
                         ", expected " + std::to_string(ctx.input_dim));
  }
  std::vector<double> phi(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    phi[k] = (v[k] - ctx.mu[k]) / std::max(ctx.sigma[k], kSigmaFloor);
  }
  return head(phi);
}

double subset_op(std::span<const double> v, int begin, int end, const MlpHead& head) {
  if (begin < 0 || begin >= end || static_cast<std::size_t>(end) > v.size()) {
    throw BoundsError("subset range [" + std::to_string(begin) + ".." + std::to_string(end) +
                      "] is invalid for an input of dimension " + std::to_string(v.size()));
  }
  std::vector<double> masked(v.size(), 0.0);
  for (int k = begin; k < end; ++k) masked[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)];
  return head(masked);
}

namespace {

// Parameter count of a node that owns parameters, 0 otherwise.
std::size_t own_param_count(const Node& n, int input_dim, int head_width) {
  switch (n.kind) {
    case NodeKind::kTransform:
    case NodeKind::kSubset:
    case NodeKind::kNeural:
      return head_param_count(input_dim, head_width);
    case NodeKind::kAdd:
      return 3;
    case NodeKind::kConst:
    case NodeKind::kMul:
    case NodeKind::kActivation:
    case NodeKind::kScale:
      return 1;
    default:
      return 0;
  }
}

bool is_head(NodeKind k) {
  return k == NodeKind::kTransform || k == NodeKind::kSubset || k == NodeKind::kNeural;
}

template <typename Fn>
void walk_paths(const Ast& node, const std::string& path, Fn&& fn) {
  fn(*node, path);
  for (std::size_t i = 0; i < node->children.size(); ++i) {
    walk_paths(node->children[i], path + "." + std::to_string(i), fn);
  }
}

}  // namespace

ParamStore init_params(const Ast& program, int input_dim, int head_width, std::uint64_t seed) {
  if (input_dim < 1) throw BoundsError("input dimension must be positive");
  if (head_width < 0) throw BoundsError("head width must be non-negative");
  ParamStore store;
  store.seed = seed;
  walk_paths(program, "r", [&](const Node& n, const std::string& path) {
    const std::size_t len = own_param_count(n, input_dim, head_width);
    if (len == 0) return;
    ParamSlot slot;
    slot.offset = store.values.size();
    slot.length = len;
    slot.head_width = is_head(n.kind) ? head_width : -1;
    store.layout.emplace(path, slot);

    std::mt19937_64 rng(derive_seed(seed, path));
    auto uniform = [&](double bound) {
      return std::uniform_real_distribution<double>(-bound, bound)(rng);
    };
    if (is_head(n.kind)) {
      const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
      if (head_width == 0) {
        for (std::size_t k = 0; k < len; ++k) store.values.push_back(uniform(in_bound));
        return;
      }
      const double out_bound = 1.0 / std::sqrt(static_cast<double>(head_width));
      const std::size_t first_layer =
          static_cast<std::size_t>(input_dim) * head_width + static_cast<std::size_t>(head_width);
      for (std::size_t k = 0; k < first_layer; ++k) store.values.push_back(uniform(in_bound));
      for (std::size_t k = first_layer; k < len; ++k) store.values.push_back(uniform(out_bound));
      return;
    }
    const double bound = n.kind == NodeKind::kAdd ? 1.0 / std::sqrt(2.0) : 1.0;
    for (std::size_t k = 0; k < len; ++k) store.values.push_back(uniform(bound));
  });
  return store;
}

CompiledProgram::CompiledProgram(const Ast& program, const ParamStore& params, int input_dim)
    : input_dim_(input_dim) {
  if (!is_complete(program)) {
    throw PreconditionError("cannot evaluate an incomplete program: " + render(program));
  }
  if (input_dim < 1) throw BoundsError("input dimension must be positive");
  std::size_t used_slots = 0;
  std::function<int(const Ast&, const std::string&)> flatten = [&](const Ast& node,
                                                                   const std::string& path) {
    const int index = static_cast<int>(ops_.size());
    ops_.push_back(Op{node->kind});
    Op op{node->kind};
    op.lo = node->lo;
    op.hi = node->hi;
    op.act = node->activation;
    if (node->kind == NodeKind::kSubset &&
        (node->lo < 0 || node->lo >= node->hi || node->hi > input_dim)) {
      throw BoundsError("subset range [" + std::to_string(node->lo) + ".." +
                        std::to_string(node->hi) + "] is invalid for input dimension " +
                        std::to_string(input_dim));
    }
    if (node->kind == NodeKind::kNeural) {
      op.lo = 0;
      op.hi = input_dim;
    }
    if (node->kind == NodeKind::kTransform) {
      op.lo = 0;
      op.hi = input_dim;
    }
    if (node->kind == NodeKind::kFeature && (node->lo < 0 || node->lo >= input_dim)) {
      throw BoundsError("feature x" + std::to_string(node->lo + 1) +
                        " exceeds input dimension " + std::to_string(input_dim));
    }
    const auto it = params.layout.find(path);
    const std::size_t want =
        it == params.layout.end() ? 0
                                  : own_param_count(*node, input_dim,
                                                    std::max(it->second.head_width, 0));
    const std::size_t need = own_param_count(*node, input_dim, 0);
    if (need > 0 || (it != params.layout.end())) {
      if (it == params.layout.end()) {
        throw DimensionError("parameter layout has no entry for node " + path);
      }
      if (is_head(node->kind) != (it->second.head_width >= 0) || it->second.length != want ||
          it->second.offset + it->second.length > params.values.size()) {
        throw DimensionError("parameter layout entry for node " + path + " does not fit");
      }
      op.param = it->second.offset;
      op.width = it->second.head_width;
      ++used_slots;
    }
    if (is_head(node->kind)) {
      op.scratch = scratch_size_;
      scratch_size_ += static_cast<std::size_t>(input_dim) + static_cast<std::size_t>(op.width);
    }
    for (std::size_t i = 0; i < node->children.size(); ++i) {
      op.child[i] = flatten(node->children[i], path + "." + std::to_string(i));
    }
    ops_[static_cast<std::size_t>(index)] = op;
    return index;
  };
  flatten(program, "r");
  if (used_slots != params.layout.size()) {
    throw DimensionError("parameter layout has entries for nodes absent from the program");
  }
  param_count_ = params.values.size();
}

double CompiledProgram::head_forward(const Op& op, std::span<const double> theta,
                                     const double* x, double* hidden) const {
  const auto d = static_cast<std::size_t>(input_dim_);
  const auto lo = static_cast<std::size_t>(op.lo);
  const auto hi = static_cast<std::size_t>(op.hi);
  const double* p = theta.data() + op.param;
  if (op.width == 0) {
    double out = p[d];
    for (std::size_t k = lo; k < hi; ++k) out += p[k] * x[k];
    return out;
  }
  const auto w = static_cast<std::size_t>(op.width);
  const double* b1 = p + w * d;
  const double* w2 = b1 + w;
  double out = w2[w];
  for (std::size_t j = 0; j < w; ++j) {
    const double* row = p + j * d;
    double z = b1[j];
    for (std::size_t k = lo; k < hi; ++k) z += row[k] * x[k];
    hidden[j] = std::tanh(z);
    out += w2[j] * hidden[j];
  }
  return out;
}

void CompiledProgram::head_backward(const Op& op, std::span<const double> theta, const double* x,
                                    const double* hidden, double adjoint,
                                    std::span<double> grad) const {
  const auto d = static_cast<std::size_t>(input_dim_);
  const auto lo = static_cast<std::size_t>(op.lo);
  const auto hi = static_cast<std::size_t>(op.hi);
  const double* p = theta.data() + op.param;
  double* g = grad.data() + op.param;
  if (op.width == 0) {
    for (std::size_t k = lo; k < hi; ++k) g[k] += adjoint * x[k];
    g[d] += adjoint;
    return;
  }
  const auto w = static_cast<std::size_t>(op.width);
  const double* w2 = p + w * d + w;
  double* gb1 = g + w * d;
  double* gw2 = gb1 + w;
  gw2[w] += adjoint;
  for (std::size_t j = 0; j < w; ++j) {
    gw2[j] += adjoint * hidden[j];
    const double dz = adjoint * w2[j] * (1.0 - hidden[j] * hidden[j]);
    gb1[j] += dz;
    double* grow = g + j * d;
    for (std::size_t k = lo; k < hi; ++k) grow[k] += dz * x[k];
  }
}

double CompiledProgram::forward(std::span<const double> theta, std::span<const double> v,
                                const EvalContext& ctx, Tape& tape) const {
  if (v.size() != static_cast<std::size_t>(input_dim_)) {
    throw DimensionError("input has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(input_dim_));
  }
  if (theta.size() != param_count_) throw DimensionError("parameter vector has wrong length");
  tape.values.resize(ops_.size());
  tape.scratch.resize(scratch_size_);
  const auto d = static_cast<std::size_t>(input_dim_);
  for (std::size_t i = ops_.size(); i-- > 0;) {
    const Op& op = ops_[i];
    double& out = tape.values[i];
    auto val = [&](int c) { return tape.values[static_cast<std::size_t>(c)]; };
    const double* p = theta.data() + op.param;
    switch (op.kind) {
      case NodeKind::kIfThenElse: {
        const double s = sigmoid(ctx.beta * val(op.child[0]));
        out = s * val(op.child[1]) + (1.0 - s) * val(op.child[2]);
        break;
      }
      case NodeKind::kTransform: {
        double* x = tape.scratch.data() + op.scratch;
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = (v[k] - ctx.mu[k]) / std::max(ctx.sigma[k], kSigmaFloor);
        }
        out = head_forward(op, theta, x, x + d);
        break;
      }
      case NodeKind::kSubset:
      case NodeKind::kNeural:
        out = head_forward(op, theta, v.data(), tape.scratch.data() + op.scratch + d);
        break;
      case NodeKind::kConst:
        out = p[0];
        break;
      case NodeKind::kAdd:
        out = p[0] * val(op.child[0]) + p[1] * val(op.child[1]) + p[2];
        break;
      case NodeKind::kMul:
        out = p[0] * val(op.child[0]) * val(op.child[1]);
        break;
      case NodeKind::kActivation: {
        const double z = val(op.child[0]) + p[0];
        out = op.act == Activation::kTanh ? std::tanh(z) : sigmoid(z);
        break;
      }
      case NodeKind::kScale:
        out = p[0] * val(op.child[0]);
        break;
      case NodeKind::kSum:
        out = val(op.child[0]) + val(op.child[1]);
        break;
      case NodeKind::kFeature:
        out = v[static_cast<std::size_t>(op.lo)];
        break;
      case NodeKind::kInput:
        out = 0.0;
        break;
      case NodeKind::kHole:
        throw PreconditionError("hole reached during evaluation");
    }
  }
  return tape.values[0];
}

void CompiledProgram::backward(std::span<const double> theta, std::span<const double> v,
                               const EvalContext& ctx, Tape& tape, double adjoint,
                               std::span<double> grad) const {
  if (grad.size() != param_count_) throw DimensionError("gradient buffer has wrong length");
  tape.adjoints.assign(ops_.size(), 0.0);
  tape.adjoints[0] = adjoint;
  const auto d = static_cast<std::size_t>(input_dim_);
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    const double a = tape.adjoints[i];
    if (a == 0.0 && op.kind != NodeKind::kIfThenElse) continue;
    auto val = [&](int c) { return tape.values[static_cast<std::size_t>(c)]; };
    auto adj = [&](int c) -> double& { return tape.adjoints[static_cast<std::size_t>(c)]; };
    const double* p = theta.data() + op.param;
    double* g = grad.data() + op.param;
    switch (op.kind) {
      case NodeKind::kIfThenElse: {
        const double c = val(op.child[0]);
        const double x = val(op.child[1]);
        const double y = val(op.child[2]);
        const double s = sigmoid(ctx.beta * c);
        adj(op.child[0]) += a * ctx.beta * s * (1.0 - s) * (x - y);
        adj(op.child[1]) += a * s;
        adj(op.child[2]) += a * (1.0 - s);
        break;
      }
      case NodeKind::kTransform: {
        const double* x = tape.scratch.data() + op.scratch;
        head_backward(op, theta, x, x + d, a, grad);
        break;
      }
      case NodeKind::kSubset:
      case NodeKind::kNeural:
        head_backward(op, theta, v.data(), tape.scratch.data() + op.scratch + d, a, grad);
        break;
      case NodeKind::kConst:
        g[0] += a;
        break;
      case NodeKind::kAdd:
        g[0] += a * val(op.child[0]);
        g[1] += a * val(op.child[1]);
        g[2] += a;
        adj(op.child[0]) += a * p[0];
        adj(op.child[1]) += a * p[1];
        break;
      case NodeKind::kMul: {
        const double l = val(op.child[0]);
        const double r = val(op.child[1]);
        g[0] += a * l * r;
        adj(op.child[0]) += a * p[0] * r;
        adj(op.child[1]) += a * p[0] * l;
        break;
      }
      case NodeKind::kActivation: {
        const double y = tape.values[i];
        const double slope = op.act == Activation::kTanh ? 1.0 - y * y : y * (1.0 - y);
        g[0] += a * slope;
        adj(op.child[0]) += a * slope;
        break;
      }
      case NodeKind::kScale:
        g[0] += a * val(op.child[0]);
        adj(op.child[0]) += a * p[0];
        break;
      case NodeKind::kSum:
        adj(op.child[0]) += a;
        adj(op.child[1]) += a;
        break;
      case NodeKind::kFeature:
      case NodeKind::kInput:
      case NodeKind::kHole:
        break;
    }
  }
}

double eval(const Ast& program, const ParamStore& params, std::span<const double> v,
            const EvalContext& ctx) {
  ctx.validate();
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("input vector has a non-finite entry");
  }
  CompiledProgram compiled(program, params, ctx.input_dim);
  Tape tape;
  const double out = compiled.forward(params.values, v, ctx, tape);
  if (!std::isfinite(out)) throw NumericError("program output is not finite: " + render(program));
  return out;
}

LossGrad grad(const Ast& program, const ParamStore& params, std::span<const Sample> batch,
              const EvalContext& ctx) {
  if (batch.empty()) throw PreconditionError("gradient needs a non-empty batch");
  ctx.validate();
  CompiledProgram compiled(program, params, ctx.input_dim);
  LossGrad out;
  out.gradient.assign(params.size(), 0.0);
  Tape tape;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const Sample& s : batch) {
    const double pred = compiled.forward(params.values, s.v, ctx, tape);
    const double err = pred - s.y;
    out.loss += err * err * scale;
    compiled.backward(params.values, s.v, ctx, tape, 2.0 * err * scale, out.gradient);
  }
  return out;
}

std::vector<double> predict(const CompiledProgram& program, std::span<const double> theta,
                            const Matrix& inputs, const EvalContext& ctx) {
  std::vector<double> out(inputs.rows);
  Tape tape;
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    out[i] = program.forward(theta, inputs.row(i), ctx, tape);
  }
  return out;
}

}  // namespace nester
