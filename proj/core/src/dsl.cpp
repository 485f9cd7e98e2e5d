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

#include "nester/dsl.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "nester/error.hpp"

namespace nester {
namespace ast {
namespace {

Ast make(NodeKind kind, Sort sort, std::vector<Ast> children = {}) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->sort = sort;
  node->children = std::move(children);
  return node;
}

}  // namespace

Ast ite(Ast cond, Ast then_branch, Ast else_branch) {
  return make(NodeKind::kIfThenElse, Sort::kReal,
              {std::move(cond), std::move(then_branch), std::move(else_branch)});
}

Ast transform(Ast child) { return make(NodeKind::kTransform, Sort::kReal, {std::move(child)}); }

Ast subset(Ast child, int begin, int end) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::kSubset;
  node->sort = Sort::kReal;
  node->children = {std::move(child)};
  node->lo = begin;
  node->hi = end;
  return node;
}

Ast constant() { return make(NodeKind::kConst, Sort::kReal); }

Ast add(Ast left, Ast right) {
  return make(NodeKind::kAdd, Sort::kReal, {std::move(left), std::move(right)});
}

Ast mul(Ast left, Ast right) {
  return make(NodeKind::kMul, Sort::kReal, {std::move(left), std::move(right)});
}

Ast input() { return make(NodeKind::kInput, Sort::kVec); }

Ast activation(Ast child, Activation act) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::kActivation;
  node->sort = Sort::kReal;
  node->children = {std::move(child)};
  node->activation = act;
  return node;
}

Ast scale(Ast child) { return make(NodeKind::kScale, Sort::kReal, {std::move(child)}); }

Ast sum(Ast left, Ast right) {
  return make(NodeKind::kSum, Sort::kReal, {std::move(left), std::move(right)});
}

Ast feature(int index) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::kFeature;
  node->sort = Sort::kReal;
  node->lo = index;
  return node;
}

Ast neural() { return make(NodeKind::kNeural, Sort::kReal); }

Ast hole(Sort sort, int id) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::kHole;
  node->sort = sort;
  node->hole_id = id;
  return node;
}

}  // namespace ast

namespace {

template <typename Fn>
void preorder(const Ast& root, Fn&& fn) {
  fn(*root);
  for (const auto& child : root->children) preorder(child, fn);
}

int max_hole_id(const Ast& root) {
  int best = -1;
  preorder(root, [&](const Node& n) {
    if (n.kind == NodeKind::kHole) best = std::max(best, n.hole_id);
  });
  return best;
}

const char* sort_name(Sort s) { return s == Sort::kReal ? "real" : "vector"; }

Ast instantiate(const Rule& rule, int& next_id) {
  std::vector<Ast> kids;
  kids.reserve(rule.child_sorts.size());
  for (Sort s : rule.child_sorts) kids.push_back(ast::hole(s, next_id++));
  switch (rule.shape) {
    case NodeKind::kIfThenElse:
      return ast::ite(kids[0], kids[1], kids[2]);
    case NodeKind::kTransform:
      return ast::transform(kids[0]);
    case NodeKind::kSubset:
      return ast::subset(kids[0], rule.lo, rule.hi);
    case NodeKind::kConst:
      return ast::constant();
    case NodeKind::kAdd:
      return ast::add(kids[0], kids[1]);
    case NodeKind::kMul:
      return ast::mul(kids[0], kids[1]);
    case NodeKind::kInput:
      return ast::input();
    case NodeKind::kActivation:
      return ast::activation(kids[0], rule.activation);
    case NodeKind::kScale:
      return ast::scale(kids[0]);
    case NodeKind::kSum:
      return ast::sum(kids[0], kids[1]);
    case NodeKind::kFeature:
      return ast::feature(rule.lo);
    case NodeKind::kNeural:
    case NodeKind::kHole:
      break;
  }
  throw ExpansionError("rule " + std::to_string(rule.id) + " has no constructor");
}

Ast replace_hole(const Ast& node, int hole_id, const Rule& rule, int& next_id, bool& found) {
  if (node->kind == NodeKind::kHole) {
    if (node->hole_id != hole_id) return node;
    found = true;
    if (node->sort != rule.lhs) {
      throw ExpansionError(std::string("sort mismatch: hole ") + std::to_string(hole_id) + " is " +
                           sort_name(node->sort) + " but rule '" + rule.name() + "' produces " +
                           sort_name(rule.lhs));
    }
    return instantiate(rule, next_id);
  }
  bool changed = false;
  std::vector<Ast> kids;
  kids.reserve(node->children.size());
  for (const auto& child : node->children) {
    if (found) {
      kids.push_back(child);
      continue;
    }
    kids.push_back(replace_hole(child, hole_id, rule, next_id, found));
    changed = changed || kids.back() != child;
  }
  if (!changed) return node;
  auto copy = std::make_shared<Node>(*node);
  copy->children = std::move(kids);
  return copy;
}

}  // namespace

bool is_complete(const Ast& root) { return hole_count(root) == 0; }

int hole_count(const Ast& root) {
  int count = 0;
  preorder(root, [&](const Node& n) { count += n.kind == NodeKind::kHole; });
  return count;
}

std::vector<int> hole_ids(const Ast& root) {
  std::vector<int> ids;
  preorder(root, [&](const Node& n) {
    if (n.kind == NodeKind::kHole) ids.push_back(n.hole_id);
  });
  return ids;
}

int leftmost_hole(const Ast& root) {
  const auto ids = hole_ids(root);
  return ids.empty() ? -1 : ids.front();
}

Sort hole_sort(const Ast& root, int hole_id) {
  const Node* hit = nullptr;
  preorder(root, [&](const Node& n) {
    if (n.kind == NodeKind::kHole && n.hole_id == hole_id) hit = &n;
  });
  if (hit == nullptr) throw ExpansionError("no hole with id " + std::to_string(hole_id));
  return hit->sort;
}

int node_count(const Ast& root) {
  int count = 0;
  preorder(root, [&](const Node&) { ++count; });
  return count;
}

int depth(const Ast& root) {
  int below = 0;
  for (const auto& child : root->children) below = std::max(below, depth(child));
  return below + (root->sort == Sort::kReal ? 1 : 0);
}

bool structurally_equal(const Ast& a, const Ast& b) {
  if (a->kind != b->kind || a->sort != b->sort || a->lo != b->lo || a->hi != b->hi ||
      a->activation != b->activation || a->children.size() != b->children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

std::string Rule::name() const {
  switch (shape) {
    case NodeKind::kIfThenElse:
      return "if _ then _ else _";
    case NodeKind::kTransform:
      return "transform(_,mu,sigma)";
    case NodeKind::kSubset:
      return "subset(_,[" + std::to_string(lo) + ".." + std::to_string(hi) + "])";
    case NodeKind::kConst:
      return "const";
    case NodeKind::kAdd:
    case NodeKind::kSum:
      return "add(_,_)";
    case NodeKind::kMul:
      return "mul(_,_)";
    case NodeKind::kInput:
      return "v";
    case NodeKind::kActivation:
      return "g(_)";
    case NodeKind::kScale:
      return "mul(theta,_)";
    case NodeKind::kFeature:
      return "x" + std::to_string(lo + 1);
    case NodeKind::kNeural:
      return "nn(v)";
    case NodeKind::kHole:
      break;
  }
  return "?";
}

Grammar::Grammar(GrammarKind kind, int input_dim, std::vector<Rule> rules)
    : kind_(kind), input_dim_(input_dim), rules_(std::move(rules)) {
  if (input_dim_ < 1) throw GrammarMismatchError("grammar input dimension must be positive");
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    if (r.id != static_cast<int>(i)) {
      throw GrammarMismatchError("rule ids must be dense from 0; found " + std::to_string(r.id) +
                                 " at position " + std::to_string(i));
    }
    if (r.cost < 0) throw GrammarMismatchError("negative cost on rule " + r.name());
    std::size_t arity = 0;
    switch (r.shape) {
      case NodeKind::kIfThenElse:
        arity = 3;
        break;
      case NodeKind::kTransform:
      case NodeKind::kSubset:
      case NodeKind::kActivation:
      case NodeKind::kScale:
        arity = 1;
        break;
      case NodeKind::kAdd:
      case NodeKind::kMul:
      case NodeKind::kSum:
        arity = 2;
        break;
      default:
        arity = 0;
    }
    if (r.child_sorts.size() != arity) {
      throw GrammarMismatchError("rule " + r.name() + " expects " + std::to_string(arity) +
                                 " children");
    }
  }
  // Every sort reachable from the start must derive some complete term.
  std::set<Sort> productive;
  for (bool grew = true; grew;) {
    grew = false;
    for (const Rule& r : rules_) {
      if (productive.count(r.lhs)) continue;
      if (std::all_of(r.child_sorts.begin(), r.child_sorts.end(),
                      [&](Sort s) { return productive.count(s) > 0; })) {
        productive.insert(r.lhs);
        grew = true;
      }
    }
  }
  std::set<Sort> reachable{start()};
  for (bool grew = true; grew;) {
    grew = false;
    for (const Rule& r : rules_) {
      if (!reachable.count(r.lhs)) continue;
      for (Sort s : r.child_sorts) grew = reachable.insert(s).second || grew;
    }
  }
  for (Sort s : reachable) {
    if (!productive.count(s)) {
      throw GrammarMismatchError(std::string("sort ") + sort_name(s) +
                                 " cannot derive a complete program");
    }
  }
}

std::vector<const Rule*> Grammar::rules_for(Sort lhs) const {
  std::vector<const Rule*> out;
  for (const Rule& r : rules_) {
    if (r.lhs == lhs) out.push_back(&r);
  }
  return out;
}

const Rule* Grammar::match(const Node& node) const {
  for (const Rule& r : rules_) {
    if (r.shape != node.kind || r.lhs != node.sort) continue;
    if (r.shape == NodeKind::kSubset && (r.lo != node.lo || r.hi != node.hi)) continue;
    if (r.shape == NodeKind::kFeature && r.lo != node.lo) continue;
    if (r.shape == NodeKind::kActivation && r.activation != node.activation) continue;
    return &r;
  }
  return nullptr;
}

Grammar default_grammar(int input_dim, const std::vector<SubsetRange>& subset_ranges,
                        const std::vector<AlgebraicTag>& algebraic_tags) {
  if (input_dim < 1) throw BoundsError("input dimension must be positive");
  for (const auto& r : subset_ranges) {
    if (r.begin < 0 || r.begin >= r.end || r.end > input_dim) {
      throw BoundsError("invalid subset range [" + std::to_string(r.begin) + ".." +
                        std::to_string(r.end) + "] for input dimension " +
                        std::to_string(input_dim));
    }
  }
  std::vector<SubsetRange> ranges{{0, 1}, {0, input_dim}};
  for (const auto& r : subset_ranges) ranges.push_back(r);
  std::vector<SubsetRange> unique;
  for (const auto& r : ranges) {
    if (std::find(unique.begin(), unique.end(), r) == unique.end()) unique.push_back(r);
  }

  std::vector<Rule> rules;
  auto push = [&](NodeKind shape, Sort lhs, std::vector<Sort> kids, int lo = 0, int hi = 0) {
    Rule r;
    r.id = static_cast<int>(rules.size());
    r.lhs = lhs;
    r.shape = shape;
    r.child_sorts = std::move(kids);
    r.lo = lo;
    r.hi = hi;
    rules.push_back(std::move(r));
  };
  push(NodeKind::kIfThenElse, Sort::kReal, {Sort::kReal, Sort::kReal, Sort::kReal});
  push(NodeKind::kTransform, Sort::kReal, {Sort::kVec});
  for (const auto& r : unique) push(NodeKind::kSubset, Sort::kReal, {Sort::kVec}, r.begin, r.end);
  push(NodeKind::kConst, Sort::kReal, {});
  const bool has_add = std::find(algebraic_tags.begin(), algebraic_tags.end(),
                                 AlgebraicTag::kAdd) != algebraic_tags.end();
  const bool has_mul = std::find(algebraic_tags.begin(), algebraic_tags.end(),
                                 AlgebraicTag::kMul) != algebraic_tags.end();
  if (has_add) push(NodeKind::kAdd, Sort::kReal, {Sort::kReal, Sort::kReal});
  if (has_mul) push(NodeKind::kMul, Sort::kReal, {Sort::kReal, Sort::kReal});
  push(NodeKind::kInput, Sort::kVec, {});
  return Grammar(GrammarKind::kDefault, input_dim, std::move(rules));
}

Grammar mimic_grammar(int inputs, Activation act) {
  if (inputs < 1) throw BoundsError("mimic grammar needs at least one input");
  std::vector<Rule> rules;
  auto push = [&](NodeKind shape, std::vector<Sort> kids, int lo = 0) {
    Rule r;
    r.id = static_cast<int>(rules.size());
    r.lhs = Sort::kReal;
    r.shape = shape;
    r.child_sorts = std::move(kids);
    r.cost = 0.0;
    r.lo = lo;
    r.activation = act;
    rules.push_back(std::move(r));
  };
  push(NodeKind::kActivation, {Sort::kReal});
  push(NodeKind::kScale, {Sort::kReal});
  push(NodeKind::kSum, {Sort::kReal, Sort::kReal});
  for (int k = 0; k < inputs; ++k) push(NodeKind::kFeature, {}, k);
  return Grammar(GrammarKind::kMimic, inputs, std::move(rules));
}

Ast build_nn_expression(int inputs, int hidden, Activation act) {
  if (inputs < 1 || hidden < 1) {
    throw BoundsError("network expression needs at least one input and one hidden unit");
  }
  auto weighted_sum = [](const std::vector<Ast>& terms) {
    Ast acc = ast::scale(terms.front());
    for (std::size_t i = 1; i < terms.size(); ++i) acc = ast::sum(acc, ast::scale(terms[i]));
    return acc;
  };
  std::vector<Ast> xs;
  for (int k = 0; k < inputs; ++k) xs.push_back(ast::feature(k));
  std::vector<Ast> units;
  for (int j = 0; j < hidden; ++j) units.push_back(ast::activation(weighted_sum(xs), act));
  return ast::activation(weighted_sum(units), act);
}

Ast expand(const Ast& partial, int hole_id, const Rule& rule) {
  int next_id = max_hole_id(partial) + 1;
  bool found = false;
  Ast out = replace_hole(partial, hole_id, rule, next_id, found);
  if (!found) throw ExpansionError("no hole with id " + std::to_string(hole_id));
  return out;
}

double structural_cost(const Ast& root, const Grammar& grammar) {
  double total = 0.0;
  preorder(root, [&](const Node& n) {
    if (n.kind == NodeKind::kHole) return;
    const Rule* r = grammar.match(n);
    if (r == nullptr) {
      throw GrammarMismatchError("no grammar rule produces node '" + render(std::make_shared<Node>(n)) +
                                 "'");
    }
    total += r->cost;
  });
  return total;
}

namespace {

void render_into(const Node& n, std::ostringstream& os) {
  auto child = [&](std::size_t i) { render_into(*n.children[i], os); };
  switch (n.kind) {
    case NodeKind::kIfThenElse:
      os << "if ";
      child(0);
      os << " then ";
      child(1);
      os << " else ";
      child(2);
      return;
    case NodeKind::kTransform:
      os << "transform(";
      child(0);
      os << ",mu,sigma)";
      return;
    case NodeKind::kSubset:
      os << "subset(";
      child(0);
      os << ",[" << n.lo << ".." << n.hi << "])";
      return;
    case NodeKind::kConst:
      os << "const";
      return;
    case NodeKind::kAdd:
    case NodeKind::kSum:
      os << "add(";
      child(0);
      os << ",";
      child(1);
      os << ")";
      return;
    case NodeKind::kMul:
      os << "mul(";
      child(0);
      os << ",";
      child(1);
      os << ")";
      return;
    case NodeKind::kInput:
      os << "v";
      return;
    case NodeKind::kActivation:
      os << "g(";
      child(0);
      os << ")";
      return;
    case NodeKind::kScale:
      os << "mul(theta,";
      child(0);
      os << ")";
      return;
    case NodeKind::kFeature:
      os << "x" << n.lo + 1;
      return;
    case NodeKind::kNeural:
      os << "nn(v)";
      return;
    case NodeKind::kHole:
      os << (n.sort == Sort::kReal ? "?" : "?v");
      return;
  }
}

}  // namespace

std::string render(const Ast& root) {
  std::ostringstream os;
  render_into(*root, os);
  return os.str();
}

}  // namespace nester
