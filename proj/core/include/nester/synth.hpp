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

#ifndef NESTER_SYNTH_HPP_
#define NESTER_SYNTH_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nester/dsl.hpp"
#include "nester/interp.hpp"
#include "nester/train.hpp"

namespace nester {

enum class HeuristicKind {
  // Trained loss of the neural relaxation.
  kRelaxation,
  // h = 0: uniform-cost search.
  kZero,
};

struct SynthConfig {
  int max_depth = 5;
  int max_expansions = 500;
  TrainConfig heuristic;
  TrainConfig final;
  HeuristicKind heuristic_kind = HeuristicKind::kRelaxation;
  // Worker threads for training the children of one expansion. Results do
  // not depend on this value.
  int threads = 1;

  void validate() const;
};

struct SearchNode {
  Ast ast;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
  int depth = 0;
  std::uint64_t seq = 0;
  int parent_rule = -1;
  // Set for complete nodes, trained when they were enqueued.
  std::shared_ptr<const FitResult> fit;
};

// One line of the frontier log.
struct FrontierRecord {
  std::uint64_t seq = 0;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  int depth = 0;
  std::string program;
};

struct SynthResult {
  Ast program;
  ParamStore params;
  double structural_cost = 0.0;
  double valid_loss = 0.0;
  // structural_cost + valid_loss.
  double path_cost = 0.0;
  int expansions = 0;
  int enqueued = 0;
  std::vector<FrontierRecord> frontier_log;
};

// Replaces real holes by neural heads on v and vector holes by v.
// Throws PreconditionError for complete programs.
Ast relax(const Ast& partial);

// Seed for training `program`: depends only on the base seed and the
// program text, so a program trains identically wherever it is met.
std::uint64_t program_seed(std::uint64_t base, const Ast& program);

// Best validation loss of the trained relaxation of `partial`; +inf when
// training fails.
double heuristic(const Ast& partial, const RegressionData& train, const RegressionData& valid,
                 const TrainConfig& cfg, const EvalContext& ctx);

// Best-first search over partial programs expanded at their leftmost hole.
// Frontier order is (f, depth, seq). Complete children are trained with the
// final configuration when enqueued (f = g + valid loss); the first complete
// node popped is returned. Throws BudgetError when max_expansions is reached
// first or the frontier runs dry.
SynthResult astar_synthesize(const Grammar& grammar, const RegressionData& train,
                             const RegressionData& valid, const SynthConfig& cfg,
                             const EvalContext& ctx);

struct Candidate {
  Ast program;
  double structural_cost = 0.0;
  double valid_loss = 0.0;
  double path_cost = 0.0;
};

inline constexpr std::size_t kEnumerationLimit = 10000;

// Every complete program of depth <= max_depth, or every completion of
// `partial` within that depth.
std::vector<Ast> complete_programs(const Grammar& grammar, const Ast& partial, int max_depth,
                                   std::size_t limit = kEnumerationLimit);

// Trains every complete program of depth <= max_depth and returns them
// sorted by path cost (stable in enumeration order). Refuses with
// BudgetError above kEnumerationLimit programs.
std::vector<Candidate> enumerate_exhaustive(const Grammar& grammar, const RegressionData& train,
                                            const RegressionData& valid, int max_depth,
                                            const TrainConfig& final_cfg, const EvalContext& ctx,
                                            int threads = 1);

struct DiagnosticConfig {
  int samples = 10;
  // Tolerance in h <= J + epsilon.
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct AdmissibilitySample {
  std::string node;
  double h = 0.0;
  // Cost to go: min over completions of (s(completion) - s(node) + loss).
  double j_hat = 0.0;
  int completions = 0;
  bool admissible = false;
};

struct AdmissibilityReport {
  double fraction_admissible = 0.0;
  double epsilon = 0.0;
  // Quantiles 0.5, 0.9 and 1.0 of max(h - J, 0).
  double epsilon_hat_median = 0.0;
  double epsilon_hat_p90 = 0.0;
  double epsilon_hat_max = 0.0;
  std::vector<AdmissibilitySample> samples;
};

// Samples random partial nodes within cfg.max_depth and compares their
// heuristic against the exhaustively computed cost to go.
AdmissibilityReport admissibility_diagnostic(const Grammar& grammar, const RegressionData& train,
                                             const RegressionData& valid, const SynthConfig& cfg,
                                             const DiagnosticConfig& diag, const EvalContext& ctx);

// `seq\tf\tg\th\tdepth\tprogram` per record.
std::string format_frontier_log(const std::vector<FrontierRecord>& log);

// NESTER_THREADS, or 1 when unset or invalid.
int threads_from_env();

}  // namespace nester

#endif  // NESTER_SYNTH_HPP_
