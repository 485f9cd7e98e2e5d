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

// Recursive-descent parser for the program text format. The surface syntax
// is documented in docs/program-format.md.

#include <cctype>
#include <string>

#include "nester/dsl.hpp"
#include "nester/error.hpp"

namespace nester {
namespace {

enum class Tok { kIdent, kInt, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= src_.size()) return tok;
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok.kind = Tok::kIdent;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_')) {
        tok.text += take();
      }
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Tok::kInt;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        tok.text += take();
      }
      return tok;
    }
    tok.kind = Tok::kPunct;
    if (c == '.' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
      tok.text = "..";
      take();
      take();
      return tok;
    }
    if (c == '?' && pos_ + 1 < src_.size() && src_[pos_ + 1] == 'v') {
      tok.text = "?v";
      take();
      take();
      return tok;
    }
    if (std::string_view("()[],|?").find(c) == std::string_view::npos) {
      throw SyntaxError(std::string("unexpected character '") + c + "'", line_, column_);
    }
    tok.text = std::string(1, take());
    return tok;
  }

 private:
  char take() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) take();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, const Grammar& grammar) : lexer_(src), grammar_(grammar) {
    advance();
  }

  Ast parse_program() {
    Ast root = parse_real();
    if (cur_.kind != Tok::kEnd) fail("trailing input '" + cur_.text + "'");
    return root;
  }

 private:
  bool mimic() const { return grammar_.kind() == GrammarKind::kMimic; }

  void advance() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what, cur_.line, cur_.column);
  }

  void expect(const std::string& text) {
    if (cur_.text != text || cur_.kind == Tok::kEnd) {
      fail("expected '" + text + "' but found '" + (cur_.kind == Tok::kEnd ? "end of input" : cur_.text) + "'");
    }
    advance();
  }

  int expect_int() {
    if (cur_.kind != Tok::kInt) fail("expected an integer");
    const int value = std::stoi(cur_.text);
    advance();
    return value;
  }

  Ast checked(Ast node, const Token& at) {
    if (grammar_.match(*node) == nullptr) {
      throw SyntaxError("'" + render(node) + "' is not producible by the grammar", at.line,
                        at.column);
    }
    return node;
  }

  Ast parse_vec() {
    const Token at = cur_;
    if (cur_.text == "?v") {
      advance();
      return ast::hole(Sort::kVec, next_hole_++);
    }
    if (cur_.kind == Tok::kIdent && cur_.text == "v") {
      advance();
      return checked(ast::input(), at);
    }
    fail("expected the input vector 'v'");
  }

  Ast parse_real() {
    const Token at = cur_;
    if (cur_.kind == Tok::kPunct && cur_.text == "?") {
      advance();
      return ast::hole(Sort::kReal, next_hole_++);
    }
    if (cur_.kind != Tok::kIdent) fail("expected an expression");
    const std::string name = cur_.text;
    advance();
    if (name == "if" && !mimic()) {
      Ast c = parse_real();
      expect("then");
      Ast t = parse_real();
      expect("else");
      Ast e = parse_real();
      return checked(ast::ite(c, t, e), at);
    }
    if (name == "transform" && !mimic()) {
      expect("(");
      Ast child = parse_vec();
      expect(",");
      expect("mu");
      expect(",");
      expect("sigma");
      expect(")");
      return checked(ast::transform(child), at);
    }
    if (name == "subset" && !mimic()) {
      expect("(");
      Ast child = parse_vec();
      expect(",");
      expect("[");
      const int lo = expect_int();
      expect("..");
      int hi = 0;
      if (cur_.text == "|") {
        advance();
        expect("v");
        expect("|");
        hi = grammar_.input_dim();
      } else {
        hi = expect_int();
      }
      expect("]");
      expect(")");
      return checked(ast::subset(child, lo, hi), at);
    }
    if (name == "const" && !mimic()) return checked(ast::constant(), at);
    if (name == "nn" && !mimic()) {
      expect("(");
      expect("v");
      expect(")");
      return ast::neural();
    }
    if (name == "add") {
      expect("(");
      Ast l = parse_real();
      expect(",");
      Ast r = parse_real();
      expect(")");
      return checked(mimic() ? ast::sum(l, r) : ast::add(l, r), at);
    }
    if (name == "mul") {
      expect("(");
      if (mimic()) {
        expect("theta");
        expect(",");
        Ast child = parse_real();
        expect(")");
        return checked(ast::scale(child), at);
      }
      Ast l = parse_real();
      expect(",");
      Ast r = parse_real();
      expect(")");
      return checked(ast::mul(l, r), at);
    }
    if (name == "g" && mimic()) {
      expect("(");
      Ast child = parse_real();
      expect(")");
      const Rule* g = nullptr;
      for (const Rule* r : grammar_.rules_for(Sort::kReal)) {
        if (r->shape == NodeKind::kActivation) g = r;
      }
      return checked(ast::activation(child, g ? g->activation : Activation::kTanh), at);
    }
    if (mimic() && name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::stoi(name.substr(1));
      if (k < 1) throw SyntaxError("feature indices start at x1", at.line, at.column);
      return checked(ast::feature(k - 1), at);
    }
    throw SyntaxError("unknown primitive '" + name + "'", at.line, at.column);
  }

  Lexer lexer_;
  const Grammar& grammar_;
  Token cur_;
  int next_hole_ = 0;
};

}  // namespace

Ast parse(std::string_view text, const Grammar& grammar) {
  return Parser(text, grammar).parse_program();
}

}  // namespace nester
