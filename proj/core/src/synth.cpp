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

#include "nester/synth.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <random>
#include <thread>
#include <unordered_set>

#include "nester/error.hpp"
#include "nester/seed.hpp"

namespace nester {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs fn(0..count-1) on up to `threads` workers. Each index writes only its
// own output slot, so results are independent of scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Ast relax_node(const Ast& node) {
  if (node->kind == NodeKind::kHole) {
    return node->sort == Sort::kReal ? ast::neural() : ast::input();
  }
  bool changed = false;
  std::vector<Ast> kids;
  kids.reserve(node->children.size());
  for (const auto& child : node->children) {
    kids.push_back(relax_node(child));
    changed = changed || kids.back() != child;
  }
  if (!changed) return node;
  auto copy = std::make_shared<Node>(*node);
  copy->children = std::move(kids);
  return copy;
}

// Trains a complete program with its program-derived seed; +inf loss when
// every restart diverges.
std::shared_ptr<const FitResult> train_complete(const Ast& program, const RegressionData& train,
                                                const RegressionData& valid,
                                                const TrainConfig& cfg, const EvalContext& ctx) {
  TrainConfig seeded = cfg;
  seeded.seed = program_seed(cfg.seed, program);
  try {
    return std::make_shared<const FitResult>(fit_regression(program, train, valid, seeded, ctx));
  } catch (const TrainingError& e) {
    std::clog << "warning: " << e.what() << "\n";
    return nullptr;
  }
}

struct FrontierOrder {
  bool operator()(const std::shared_ptr<SearchNode>& a, const std::shared_ptr<SearchNode>& b) const {
    // priority_queue pops the largest; invert for a min-queue.
    if (a->f != b->f) return a->f > b->f;
    if (a->depth != b->depth) return a->depth > b->depth;
    return a->seq > b->seq;
  }
};

FrontierRecord record_of(const SearchNode& node) {
  return FrontierRecord{node.seq, node.f, node.g, node.h, node.depth, render(node.ast)};
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void enumerate_into(const Grammar& grammar, const Ast& node, int max_depth, std::size_t limit,
                    std::vector<Ast>& out) {
  const int hole = leftmost_hole(node);
  if (hole < 0) {
    out.push_back(node);
    if (out.size() > limit) {
      throw BudgetError("enumeration exceeds the limit of " + std::to_string(limit) + " programs");
    }
    return;
  }
  for (const Rule* rule : grammar.rules_for(hole_sort(node, hole))) {
    Ast child = expand(node, hole, *rule);
    if (depth(child) <= max_depth) enumerate_into(grammar, child, max_depth, limit, out);
  }
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::min(values.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace

void SynthConfig::validate() const {
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (max_expansions < 1) throw ConfigError("max_expansions must be positive");
  heuristic.validate();
  final.validate();
}

Ast relax(const Ast& partial) {
  if (is_complete(partial)) {
    throw PreconditionError("relaxation needs a partial program, got " + render(partial));
  }
  return relax_node(partial);
}

std::uint64_t program_seed(std::uint64_t base, const Ast& program) {
  return derive_seed(base, render(program));
}

double heuristic(const Ast& partial, const RegressionData& train, const RegressionData& valid,
                 const TrainConfig& cfg, const EvalContext& ctx) {
  const Ast relaxed = relax(partial);
  const auto fitted = train_complete(relaxed, train, valid, cfg, ctx);
  return fitted ? fitted->valid_loss : kInf;
}

SynthResult astar_synthesize(const Grammar& grammar, const RegressionData& train,
                             const RegressionData& valid, const SynthConfig& cfg,
                             const EvalContext& ctx) {
  cfg.validate();
  ctx.validate();
  if (train.size() == 0 || valid.size() == 0) throw PreconditionError("training splits must be non-empty");

  std::priority_queue<std::shared_ptr<SearchNode>, std::vector<std::shared_ptr<SearchNode>>,
                      FrontierOrder>
      frontier;
  std::unordered_set<std::string> closed;
  std::uint64_t next_seq = 0;
  SynthResult result;

  auto root = std::make_shared<SearchNode>();
  root->ast = ast::hole(grammar.start(), 0);
  root->depth = depth(root->ast);
  root->seq = next_seq++;
  frontier.push(root);

  while (!frontier.empty()) {
    const std::shared_ptr<SearchNode> node = frontier.top();
    frontier.pop();
    if (is_complete(node->ast)) {
      result.program = node->ast;
      result.params = node->fit->params;
      result.structural_cost = node->g;
      result.valid_loss = node->fit->valid_loss;
      result.path_cost = node->f;
      return result;
    }
    std::string key = render(node->ast);
    if (!closed.insert(key).second) continue;
    if (result.expansions >= cfg.max_expansions) {
      throw BudgetError("expansion budget of " + std::to_string(cfg.max_expansions) +
                        " exhausted; best partial program: " + key);
    }
    ++result.expansions;
    result.frontier_log.push_back(record_of(*node));

    const int hole = leftmost_hole(node->ast);
    std::vector<std::shared_ptr<SearchNode>> children;
    for (const Rule* rule : grammar.rules_for(hole_sort(node->ast, hole))) {
      auto child = std::make_shared<SearchNode>();
      child->ast = expand(node->ast, hole, *rule);
      child->depth = depth(child->ast);
      if (child->depth > cfg.max_depth) continue;
      child->g = node->g + rule->cost;
      child->parent_rule = rule->id;
      children.push_back(std::move(child));
    }
    parallel_for(children.size(), cfg.threads, [&](std::size_t i) {
      SearchNode& child = *children[i];
      if (is_complete(child.ast)) {
        child.fit = train_complete(child.ast, train, valid, cfg.final, ctx);
        child.h = 0.0;
        child.f = child.fit ? child.g + child.fit->valid_loss : kInf;
        return;
      }
      child.h = cfg.heuristic_kind == HeuristicKind::kZero
                    ? 0.0
                    : heuristic(child.ast, train, valid, cfg.heuristic, ctx);
      child.f = child.g + child.h;
    });
    for (auto& child : children) {
      if (is_complete(child->ast) && !child->fit) continue;
      child->seq = next_seq++;
      ++result.enqueued;
      result.frontier_log.push_back(record_of(*child));
      frontier.push(std::move(child));
    }
  }
  throw BudgetError("search space exhausted without a trainable complete program");
}

std::vector<Ast> complete_programs(const Grammar& grammar, const Ast& partial, int max_depth,
                                   std::size_t limit) {
  std::vector<Ast> out;
  if (depth(partial) <= max_depth) enumerate_into(grammar, partial, max_depth, limit, out);
  return out;
}

std::vector<Candidate> enumerate_exhaustive(const Grammar& grammar, const RegressionData& train,
                                            const RegressionData& valid, int max_depth,
                                            const TrainConfig& final_cfg, const EvalContext& ctx,
                                            int threads) {
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  final_cfg.validate();
  const auto programs = complete_programs(grammar, ast::hole(grammar.start(), 0), max_depth);
  std::vector<Candidate> out(programs.size());
  parallel_for(programs.size(), threads, [&](std::size_t i) {
    Candidate& c = out[i];
    c.program = programs[i];
    c.structural_cost = structural_cost(c.program, grammar);
    const auto fitted = train_complete(c.program, train, valid, final_cfg, ctx);
    c.valid_loss = fitted ? fitted->valid_loss : kInf;
    c.path_cost = c.structural_cost + c.valid_loss;
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.path_cost < b.path_cost; });
  return out;
}

AdmissibilityReport admissibility_diagnostic(const Grammar& grammar, const RegressionData& train,
                                             const RegressionData& valid, const SynthConfig& cfg,
                                             const DiagnosticConfig& diag, const EvalContext& ctx) {
  cfg.validate();
  if (diag.samples < 1) throw ConfigError("diagnostic needs at least one sample");
  std::mt19937_64 rng(diag.seed);
  const Ast root = ast::hole(grammar.start(), 0);

  // Random partial nodes: walks of random length from the root that stay
  // within the depth limit and still contain a hole.
  std::vector<Ast> nodes;
  while (nodes.size() < static_cast<std::size_t>(diag.samples)) {
    const int steps = std::uniform_int_distribution<int>(0, 2 * cfg.max_depth)(rng);
    Ast node = root;
    for (int s = 0; s < steps && !is_complete(node); ++s) {
      const int hole = leftmost_hole(node);
      std::vector<Ast> options;
      for (const Rule* rule : grammar.rules_for(hole_sort(node, hole))) {
        Ast child = expand(node, hole, *rule);
        if (depth(child) <= cfg.max_depth) options.push_back(std::move(child));
      }
      node = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    }
    if (!is_complete(node)) nodes.push_back(node);
  }

  std::vector<std::vector<Ast>> completions(nodes.size());
  std::map<std::string, Ast> distinct;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    completions[i] = complete_programs(grammar, nodes[i], cfg.max_depth);
    for (const auto& c : completions[i]) distinct.emplace(render(c), c);
  }
  std::vector<std::pair<std::string, Ast>> jobs(distinct.begin(), distinct.end());
  std::vector<double> losses(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const auto fitted = train_complete(jobs[i].second, train, valid, cfg.final, ctx);
    losses[i] = fitted ? fitted->valid_loss : kInf;
  });
  std::map<std::string, double> loss_of;
  for (std::size_t i = 0; i < jobs.size(); ++i) loss_of[jobs[i].first] = losses[i];

  std::vector<double> h(nodes.size());
  parallel_for(nodes.size(), cfg.threads, [&](std::size_t i) {
    h[i] = heuristic(nodes[i], train, valid, cfg.heuristic, ctx);
  });

  AdmissibilityReport report;
  report.epsilon = diag.epsilon;
  std::vector<double> gaps;
  int admissible = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    AdmissibilitySample s;
    s.node = render(nodes[i]);
    s.h = h[i];
    s.completions = static_cast<int>(completions[i].size());
    const double base = structural_cost(nodes[i], grammar);
    s.j_hat = kInf;
    for (const auto& c : completions[i]) {
      s.j_hat = std::min(s.j_hat, structural_cost(c, grammar) - base + loss_of[render(c)]);
    }
    s.admissible = s.h <= s.j_hat + diag.epsilon;
    admissible += s.admissible;
    gaps.push_back(std::max(s.h - s.j_hat, 0.0));
    report.samples.push_back(std::move(s));
  }
  report.fraction_admissible = static_cast<double>(admissible) / static_cast<double>(nodes.size());
  report.epsilon_hat_median = quantile(gaps, 0.5);
  report.epsilon_hat_p90 = quantile(gaps, 0.9);
  report.epsilon_hat_max = quantile(gaps, 1.0);
  return report;
}

std::string format_frontier_log(const std::vector<FrontierRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    out += std::to_string(r.seq) + "\t" + format_number(r.f) + "\t" + format_number(r.g) + "\t" +
           format_number(r.h) + "\t" + std::to_string(r.depth) + "\t" + r.program + "\n";
  }
  return out;
}

int threads_from_env() {
  const char* raw = std::getenv("NESTER_THREADS");
  if (raw == nullptr) return 1;
  int value = 0;
  const std::string_view text(raw);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) return 1;
  return value;
}

}  // namespace nester
