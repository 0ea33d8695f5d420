/* Copyright 2026 The idsample Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <array>
#include <cctype>
#include <memory>
#include <utility>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "idsample/checker.h"

namespace idsample {

namespace mp = boost::multiprecision;

namespace {

struct Node {
  enum class Op { kNumber, kPi, kAdd, kSub, kMul, kDiv, kNeg, kPow, kSqrt, kRoot };
  Op op;
  Rational value;  // kNumber
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;  // kRoot: lhs = index, rhs = radicand
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_number(Rational v) {
  auto n = std::make_unique<Node>();
  n->op = Node::Op::kNumber;
  n->value = std::move(v);
  return n;
}

NodePtr make_node(Node::Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

enum class Tok {
  kNumber, kPlus, kMinus, kMul, kDiv, kCaret, kLParen, kRParen, kLBrace,
  kRBrace, kLBracket, kRBracket, kFrac, kSqrt, kPi, kEnd
};

struct Token {
  Tok kind;
  std::string text;
};


void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Drops LaTeX spacing and sizing noise that carries no value.
std::string strip_decorations(std::string_view text) {
  std::string s = normalize_answer_text(text);
  // "\!" etc. must go before single-character processing.
  for (std::string_view noise : {"\\displaystyle", "\\left", "\\right", "\\!",
                                 "\\,", "\\;", "\\:", "\\ "}) {
    replace_all(s, noise, " ");
  }
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  s = normalize_answer_text(s);
  while (!s.empty() && s.back() == '.') s.pop_back();
  // A leading "x =" names the answer; the value is what follows.
  if (s.size() > 2 && std::isalpha(static_cast<unsigned char>(s[0]))) {
    std::size_t i = 1;
    while (i < s.size() && s[i] == ' ') ++i;
    if (i < s.size() && s[i] == '=') s = normalize_answer_text(s.substr(i + 1));
  }
  return s;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() &&
         std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      bool seen_dot = false;
      while (j < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[j])) ||
              (s[j] == '.' && !seen_dot))) {
        if (s[j] == '.') seen_dot = true;
        ++j;
      }
      out.push_back({Tok::kNumber, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    switch (c) {
      case '+': out.push_back({Tok::kPlus, "+"}); ++i; continue;
      case '-': out.push_back({Tok::kMinus, "-"}); ++i; continue;
      case '*': out.push_back({Tok::kMul, "*"}); ++i; continue;
      case '/': out.push_back({Tok::kDiv, "/"}); ++i; continue;
      case '^': out.push_back({Tok::kCaret, "^"}); ++i; continue;
      case '(': out.push_back({Tok::kLParen, "("}); ++i; continue;
      case ')': out.push_back({Tok::kRParen, ")"}); ++i; continue;
      case '{': out.push_back({Tok::kLBrace, "{"}); ++i; continue;
      case '}': out.push_back({Tok::kRBrace, "}"}); ++i; continue;
      case '[': out.push_back({Tok::kLBracket, "["}); ++i; continue;
      case ']': out.push_back({Tok::kRBracket, "]"}); ++i; continue;
      default: break;
    }
    if (c == '\\' || std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
      const std::string_view word = s.substr(i, j - i);
      if (word == "\\frac") {
        out.push_back({Tok::kFrac, std::string(word)});
      } else if (word == "\\sqrt" || word == "sqrt") {
        out.push_back({Tok::kSqrt, std::string(word)});
      } else if (word == "\\pi" || word == "pi") {
        out.push_back({Tok::kPi, std::string(word)});
      } else if (word == "\\cdot" || word == "\\times") {
        out.push_back({Tok::kMul, std::string(word)});
      } else if (word == "\\div") {
        out.push_back({Tok::kDiv, std::string(word)});
      } else {
        throw UnparseableAnswer("unsupported symbol '" + std::string(word) + "'");
      }
      i = j;
      continue;
    }
    throw UnparseableAnswer(std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::kEnd, ""});
  return out;
}

// cpp_int reads a leading 0 as an octal prefix, so strip zeros first.
BigInt parse_digits(const std::string& digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string::npos ? BigInt(0) : BigInt(digits.substr(first));
}

Rational parse_decimal(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(parse_digits(text));
  const std::string frac = text.substr(dot + 1);
  BigInt scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  return Rational(parse_digits(text.substr(0, dot) + frac), scale);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  NodePtr parse() {
    NodePtr e = expression();
    if (peek().kind != Tok::kEnd) {
      throw UnparseableAnswer("trailing input at '" + peek().text + "'");
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }
  void expect(Tok kind, const char* what) {
    if (!accept(kind)) throw UnparseableAnswer(std::string("expected ") + what);
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept(Tok::kPlus)) {
        lhs = make_node(Node::Op::kAdd, std::move(lhs), term());
      } else if (accept(Tok::kMinus)) {
        lhs = make_node(Node::Op::kSub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  bool starts_implicit_factor() const {
    switch (peek().kind) {
      case Tok::kLParen:
      case Tok::kLBrace:
      case Tok::kFrac:
      case Tok::kSqrt:
      case Tok::kPi:
        return true;
      default:
        return false;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept(Tok::kMul)) {
        lhs = make_node(Node::Op::kMul, std::move(lhs), unary());
      } else if (accept(Tok::kDiv)) {
        lhs = make_node(Node::Op::kDiv, std::move(lhs), unary());
      } else if (starts_implicit_factor()) {
        lhs = make_node(Node::Op::kMul, std::move(lhs), power());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept(Tok::kMinus)) return make_node(Node::Op::kNeg, unary());
    if (accept(Tok::kPlus)) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept(Tok::kCaret)) {
      return make_node(Node::Op::kPow, std::move(base), unary());
    }
    return base;
  }

  // A TeX macro argument: a braced group, a parenthesized group, or a
  // single token (\frac12 reads as \frac{1}{2}).
  NodePtr macro_argument() {
    if (accept(Tok::kLBrace)) {
      NodePtr e = expression();
      expect(Tok::kRBrace, "'}'");
      return e;
    }
    if (accept(Tok::kLParen)) {
      NodePtr e = expression();
      expect(Tok::kRParen, "')'");
      return e;
    }
    if (peek().kind == Tok::kNumber) {
      Token& t = tokens_[pos_];
      if (t.text.size() > 1 && t.text[0] != '.') {
        std::string first(1, t.text[0]);
        t.text.erase(0, 1);
        return make_number(parse_decimal(first));
      }
      return make_number(parse_decimal(take().text));
    }
    if (accept(Tok::kPi)) return make_node(Node::Op::kPi, nullptr);
    throw UnparseableAnswer("missing macro argument");
  }

  NodePtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kNumber:
        return make_number(parse_decimal(take().text));
      case Tok::kPi:
        take();
        return make_node(Node::Op::kPi, nullptr);
      case Tok::kLParen: {
        take();
        NodePtr e = expression();
        expect(Tok::kRParen, "')'");
        return e;
      }
      case Tok::kLBrace: {
        take();
        NodePtr e = expression();
        expect(Tok::kRBrace, "'}'");
        return e;
      }
      case Tok::kFrac: {
        take();
        NodePtr num = macro_argument();
        NodePtr den = macro_argument();
        return make_node(Node::Op::kDiv, std::move(num), std::move(den));
      }
      case Tok::kSqrt: {
        const bool plain = t.text == "sqrt";
        take();
        if (!plain && accept(Tok::kLBracket)) {
          NodePtr index = expression();
          expect(Tok::kRBracket, "']'");
          return make_node(Node::Op::kRoot, std::move(index), macro_argument());
        }
        if (plain && peek().kind != Tok::kLParen && peek().kind != Tok::kLBrace) {
          throw UnparseableAnswer("sqrt needs a parenthesized argument");
        }
        return make_node(Node::Op::kSqrt, macro_argument());
      }
      default:
        throw UnparseableAnswer("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

NodePtr parse_tree(std::string_view text) {
  const std::string cleaned = strip_decorations(text);
  if (cleaned.empty()) throw UnparseableAnswer("empty answer");
  return Parser(tokenize(cleaned)).parse();
}

AnswerExpr to_exact(const Node& n) {
  switch (n.op) {
    case Node::Op::kNumber:
      return AnswerExpr::from_rational(n.value);
    case Node::Op::kPi:
      throw UnparseableAnswer("pi is outside the exact grammar");
    case Node::Op::kAdd:
      return to_exact(*n.lhs) + to_exact(*n.rhs);
    case Node::Op::kSub:
      return to_exact(*n.lhs) - to_exact(*n.rhs);
    case Node::Op::kMul:
      return to_exact(*n.lhs) * to_exact(*n.rhs);
    case Node::Op::kDiv:
      return to_exact(*n.lhs) / to_exact(*n.rhs);
    case Node::Op::kNeg:
      return -to_exact(*n.lhs);
    case Node::Op::kSqrt: {
      const AnswerExpr arg = to_exact(*n.lhs);
      if (!arg.is_rational()) {
        throw UnparseableAnswer("nested radicals are outside the exact grammar");
      }
      return AnswerExpr::sqrt_of(arg.rational_value());
    }
    case Node::Op::kRoot: {
      const AnswerExpr index = to_exact(*n.lhs);
      if (index == AnswerExpr::from_rational(2)) {
        const AnswerExpr arg = to_exact(*n.rhs);
        if (!arg.is_rational()) {
          throw UnparseableAnswer("nested radicals are outside the exact grammar");
        }
        return AnswerExpr::sqrt_of(arg.rational_value());
      }
      throw UnparseableAnswer("higher roots are outside the exact grammar");
    }
    case Node::Op::kPow: {
      const AnswerExpr base = to_exact(*n.lhs);
      const AnswerExpr exponent = to_exact(*n.rhs);
      if (!exponent.is_rational()) {
        throw UnparseableAnswer("irrational exponent");
      }
      const Rational e = exponent.rational_value();
      const BigInt& den = mp::denominator(e);
      if (den != 1 && den != 2) {
        throw UnparseableAnswer("fractional exponent outside the exact grammar");
      }
      const BigInt num = mp::numerator(e);
      if (num > 4096 || num < -4096) {
        throw UnparseableAnswer("exponent too large for exact evaluation");
      }
      const long p = num.convert_to<long>();
      if (den == 1) {
        if (base.is_zero() && p < 0) throw UnparseableAnswer("division by zero");
        return base.pow(p);
      }
      // x^(p/2) = sqrt(x)^p for rational x >= 0
      if (!base.is_rational()) {
        throw UnparseableAnswer("fractional power of a radical");
      }
      const AnswerExpr root = AnswerExpr::sqrt_of(base.rational_value());
      if (root.is_zero() && p < 0) throw UnparseableAnswer("division by zero");
      return root.pow(p);
    }
  }
  throw UnparseableAnswer("unknown node");
}

std::optional<HighPrecision> to_numeric(const Node& n) {
  using R = std::optional<HighPrecision>;
  switch (n.op) {
    case Node::Op::kNumber:
      return HighPrecision(mp::numerator(n.value)) /
             HighPrecision(mp::denominator(n.value));
    case Node::Op::kPi:
      return boost::math::constants::pi<HighPrecision>();
    case Node::Op::kNeg: {
      R a = to_numeric(*n.lhs);
      if (!a) return std::nullopt;
      return -*a;
    }
    case Node::Op::kSqrt: {
      R a = to_numeric(*n.lhs);
      if (!a || *a < 0) return std::nullopt;
      return mp::sqrt(*a);
    }
    default:
      break;
  }
  R a = to_numeric(*n.lhs);
  R b = to_numeric(*n.rhs);
  if (!a || !b) return std::nullopt;
  switch (n.op) {
    case Node::Op::kAdd: return *a + *b;
    case Node::Op::kSub: return *a - *b;
    case Node::Op::kMul: return *a * *b;
    case Node::Op::kDiv:
      if (*b == 0) return std::nullopt;
      return *a / *b;
    case Node::Op::kRoot: {
      // lhs = index, rhs = radicand
      if (*a == 0 || *b < 0) return std::nullopt;
      return mp::pow(*b, 1 / *a);
    }
    case Node::Op::kPow: {
      if (*a == 0 && *b <= 0) return std::nullopt;
      if (*a < 0 && mp::floor(*b) != *b) return std::nullopt;
      if (mp::abs(*b) > 100000) return std::nullopt;
      return mp::pow(*a, *b);
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

AnswerExpr parse_expr(std::string_view text) {
  const NodePtr tree = parse_tree(text);
  return to_exact(*tree);
}

std::optional<HighPrecision> evaluate_numeric(std::string_view text) {
  try {
    const NodePtr tree = parse_tree(text);
    auto value = to_numeric(*tree);
    if (value && !mp::isfinite(*value)) return std::nullopt;
    return value;
  } catch (const UnparseableAnswer&) {
    return std::nullopt;
  }
}

std::string normalize_answer_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  // Strip matching $...$ / $$...$$ delimiters, then re-trim.
  while (out.size() >= 2 && out.front() == '$' && out.back() == '$') {
    out = out.substr(1, out.size() - 2);
    while (!out.empty() && out.front() == ' ') out.erase(0, 1);
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

RawAnswer extract_final_answer(std::string_view text) {
  // Last \boxed{...} or \fbox{...}.
  std::size_t best = std::string_view::npos;
  std::size_t best_len = 0;
  for (std::string_view macro : {"\\boxed", "\\fbox"}) {
    const std::size_t at = text.rfind(macro);
    if (at != std::string_view::npos &&
        (best == std::string_view::npos || at > best)) {
      best = at;
      best_len = macro.size();
    }
  }
  if (best != std::string_view::npos) {
    std::size_t i = best + best_len;
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size() || text[i] != '{') return {};
    int depth = 0;
    for (std::size_t j = i; j < text.size(); ++j) {
      if (text[j] == '{') {
        ++depth;
      } else if (text[j] == '}') {
        if (--depth == 0) {
          return {std::string(text.substr(i + 1, j - i - 1)), AnswerOrigin::kBoxed};
        }
      }
    }
    return {};  // unbalanced
  }

  // Last "answer:" marker, case-insensitive.
  static constexpr std::string_view kMarker = "answer:";
  std::size_t found = std::string_view::npos;
  for (std::size_t i = 0; i + kMarker.size() <= text.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < kMarker.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(text[i + k])) != kMarker[k]) {
        match = false;
        break;
      }
    }
    if (match) found = i;
  }
  if (found == std::string_view::npos) return {};
  const std::size_t start = found + kMarker.size();
  const std::size_t end = text.find('\n', start);
  std::string line = normalize_answer_text(text.substr(
      start, end == std::string_view::npos ? std::string_view::npos : end - start));
  if (line.empty()) return {};
  return {std::move(line), AnswerOrigin::kAnswerLine};
}

AnswerKey AnswerKey::from_text(std::string_view text) {
  AnswerKey key;
  key.text_ = normalize_answer_text(text);
  if (key.text_.empty()) return key;
  try {
    key.expr_ = parse_expr(key.text_);
    key.value_ = key.expr_.evaluate();
    key.kind_ = Kind::kExact;
    return key;
  } catch (const UnparseableAnswer&) {
  }
  key.value_ = evaluate_numeric(key.text_);
  key.kind_ = key.value_ ? Kind::kNumeric : Kind::kOpaque;
  return key;
}

AnswerKey AnswerKey::from_raw(const RawAnswer& raw) {
  if (raw.origin == AnswerOrigin::kNone) return AnswerKey{};
  return from_text(raw.text);
}

AnswerKey AnswerKey::exact(AnswerExpr expr) {
  AnswerKey key;
  key.kind_ = Kind::kExact;
  key.text_ = expr.render();
  key.value_ = expr.evaluate();
  key.expr_ = std::move(expr);
  return key;
}

std::string AnswerKey::display() const {
  return kind_ == Kind::kExact ? expr_.render() : text_;
}

bool equivalent(const AnswerKey& a, const AnswerKey& b,
                const EquivalenceOptions& options) {
  using Kind = AnswerKey::Kind;
  if (a.kind() == Kind::kMissing || b.kind() == Kind::kMissing) return false;
  if (a.kind() == Kind::kExact && b.kind() == Kind::kExact) {
    return a.expr() == b.expr();
  }
  if (a.kind() == Kind::kOpaque && b.kind() == Kind::kOpaque) {
    return a.text() == b.text();
  }
  if (options.numeric_fallback && a.value() && b.value()) {
    return numerically_close(*a.value(), *b.value(), options.relative_tolerance);
  }
  return false;
}

}  // namespace idsample
