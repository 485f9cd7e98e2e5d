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

#ifndef NESTER_DSL_HPP_
#define NESTER_DSL_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nester {

// Every node and every hole carries exactly one sort. Real-sorted nodes
// produce a scalar; the only vector-sorted value is the program input v.
enum class Sort : std::uint8_t { kReal, kVec };

enum class NodeKind : std::uint8_t {
  kIfThenElse,
  kTransform,
  kSubset,
  kConst,
  kAdd,
  kMul,
  kInput,
  // Constructors of the network-mimicking grammar.
  kActivation,
  kScale,
  kSum,
  kFeature,
  // Neural relaxation of a real-sorted hole. Never produced by a grammar.
  kNeural,
  kHole,
};

enum class Activation : std::uint8_t { kTanh, kSigmoid };

enum class AlgebraicTag : std::uint8_t { kAdd, kMul };

struct Node;
using Ast = std::shared_ptr<const Node>;

// Immutable AST node. Subtrees are shared between a partial structure and
// the structures expanded from it.
struct Node {
  NodeKind kind = NodeKind::kHole;
  Sort sort = Sort::kReal;
  std::vector<Ast> children;
  int lo = 0;  // subset start, or 0-based feature index
  int hi = 0;  // subset end (exclusive)
  int hole_id = -1;
  Activation activation = Activation::kTanh;
};

namespace ast {

Ast ite(Ast cond, Ast then_branch, Ast else_branch);
Ast transform(Ast child);
Ast subset(Ast child, int begin, int end);
Ast constant();
Ast add(Ast left, Ast right);
Ast mul(Ast left, Ast right);
Ast input();
Ast activation(Ast child, Activation act = Activation::kTanh);
Ast scale(Ast child);
Ast sum(Ast left, Ast right);
// `index` is 0-based; renders as x<index+1>.
Ast feature(int index);
Ast neural();
Ast hole(Sort sort, int id);

}  // namespace ast

bool is_complete(const Ast& root);
int hole_count(const Ast& root);
// Hole ids in preorder (left to right).
std::vector<int> hole_ids(const Ast& root);
// Id of the leftmost hole, or -1 for complete programs.
int leftmost_hole(const Ast& root);
Sort hole_sort(const Ast& root, int hole_id);
int node_count(const Ast& root);
// Longest root-to-leaf count of real-sorted nodes. Real holes count as one
// node since any completion puts a constructor there; v does not count, so
// subset(v,[0..d]) has depth 1.
int depth(const Ast& root);
// Structural equality ignoring hole ids.
bool structurally_equal(const Ast& a, const Ast& b);

struct Rule {
  int id = 0;
  Sort lhs = Sort::kReal;
  NodeKind shape = NodeKind::kConst;
  std::vector<Sort> child_sorts;
  double cost = 1.0;
  int lo = 0;
  int hi = 0;
  Activation activation = Activation::kTanh;

  bool is_terminal() const { return child_sorts.empty(); }
  std::string name() const;
};

enum class GrammarKind : std::uint8_t { kDefault, kMimic };

class Grammar {
 public:
  // Validates id density, arity and completability; throws
  // GrammarMismatchError otherwise.
  Grammar(GrammarKind kind, int input_dim, std::vector<Rule> rules);

  GrammarKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  Sort start() const { return Sort::kReal; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(int id) const { return rules_.at(static_cast<std::size_t>(id)); }
  std::vector<const Rule*> rules_for(Sort lhs) const;
  // Rule that produces `node` (kind plus attributes), or nullptr.
  const Rule* match(const Node& node) const;

 private:
  GrammarKind kind_;
  int input_dim_;
  std::vector<Rule> rules_;
};

struct SubsetRange {
  int begin = 0;
  int end = 0;
  friend bool operator==(const SubsetRange&, const SubsetRange&) = default;
};

// The treatment-effect grammar:
//   a := if a then a else a | transform(v,mu,sigma) | subset(v,[lo..hi])
//      | const | add(a,a) | mul(a,a)
// Subset ranges [0..1] and [0..input_dim] are always present; duplicates are
// dropped. All rule costs are 1.
Grammar default_grammar(int input_dim, const std::vector<SubsetRange>& subset_ranges = {},
                        const std::vector<AlgebraicTag>& algebraic_tags = {});

// a := g(a) | mul(theta,a) | add(a,a) | x1 | ... | xm, all costs 0.
Grammar mimic_grammar(int inputs, Activation act = Activation::kTanh);

// Expression computing a one-hidden-layer network with `inputs` inputs and
// `hidden` neurons under mimic_grammar(inputs). Biases live on the g nodes.
Ast build_nn_expression(int inputs, int hidden, Activation act = Activation::kTanh);

// Replaces hole `hole_id` by the rule's constructor with fresh child holes.
// Throws ExpansionError on a missing hole or sort mismatch.
Ast expand(const Ast& partial, int hole_id, const Rule& rule);

// Sum of rule costs over the derivation of `root`; holes cost nothing.
double structural_cost(const Ast& root, const Grammar& grammar);

std::string render(const Ast& root);
Ast parse(std::string_view text, const Grammar& grammar);

}  // namespace nester

#endif  // NESTER_DSL_HPP_
