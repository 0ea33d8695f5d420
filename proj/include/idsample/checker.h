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

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace idsample {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using HighPrecision = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<200,
                                         boost::multiprecision::digit_base_2>>;

class UnparseableAnswer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An element of Q(sqrt 2, sqrt 3, ...) in canonical form:
//
//   sum_i  c_i * sqrt(d_i)
//
// with every c_i a nonzero reduced rational and every d_i a distinct
// squarefree positive integer (d = 1 is the rational part). Terms are kept
// sorted by d, so two values are equal iff their term maps are equal.
class AnswerExpr {
 public:
  using Terms = std::map<BigInt, Rational>;

  AnswerExpr() = default;

  static AnswerExpr from_rational(const Rational& value);
  // sqrt of a nonnegative rational. Throws UnparseableAnswer for negative
  // values or radicands too large to normalize exactly.
  static AnswerExpr sqrt_of(const Rational& value);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const;
  // Only valid when is_rational().
  Rational rational_value() const;

  AnswerExpr operator-() const;
  friend AnswerExpr operator+(const AnswerExpr& a, const AnswerExpr& b);
  friend AnswerExpr operator-(const AnswerExpr& a, const AnswerExpr& b);
  friend AnswerExpr operator*(const AnswerExpr& a, const AnswerExpr& b);
  // Throws UnparseableAnswer on division by zero.
  friend AnswerExpr operator/(const AnswerExpr& a, const AnswerExpr& b);

  AnswerExpr inverse() const;
  AnswerExpr pow(long exponent) const;

  // Plain-notation rendering that parse_expr() reads back to the same value,
  // e.g. "1/2 + 2*sqrt(3)". Zero renders as "0".
  std::string render() const;
  HighPrecision evaluate() const;

  friend bool operator==(const AnswerExpr&, const AnswerExpr&) = default;

 private:
  void add_term(const BigInt& radicand, const Rational& coefficient);

  Terms terms_;
};

// Parses plain notation (1/sqrt(3), 2*sqrt(2), 2^-3) and a LaTeX subset
// (\frac, \dfrac, \sqrt, ^, \cdot, \times, \left/\right) into canonical
// form. Throws UnparseableAnswer for text outside the exact grammar.
AnswerExpr parse_expr(std::string_view text);

// Evaluates a wider grammar at 200-bit precision: everything parse_expr
// accepts plus pi, nested radicals, nth roots and rational exponents.
// Returns nullopt when the text is not a closed numeric expression.
std::optional<HighPrecision> evaluate_numeric(std::string_view text);

// Idempotent text normalization used for opaque answers: trims, collapses
// runs of whitespace and drops surrounding $ delimiters.
std::string normalize_answer_text(std::string_view text);

enum class AnswerOrigin { kBoxed, kAnswerLine, kNone };

struct RawAnswer {
  std::string text;  // empty when origin == kNone
  AnswerOrigin origin = AnswerOrigin::kNone;
};

// Contents of the last \boxed{...} (or \fbox{...}); otherwise the rest of
// the line after the last case-insensitive "answer:"; otherwise none.
RawAnswer extract_final_answer(std::string_view trajectory_text);

// An answer ready for equivalence checks. Exact answers compare by canonical
// form, numeric answers (outside the exact grammar but evaluable) by value,
// opaque answers by normalized text. Missing answers match nothing.
class AnswerKey {
 public:
  enum class Kind { kExact, kNumeric, kOpaque, kMissing };

  AnswerKey() = default;
  static AnswerKey from_text(std::string_view text);
  static AnswerKey from_raw(const RawAnswer& raw);
  static AnswerKey exact(AnswerExpr expr);

  Kind kind() const { return kind_; }
  const AnswerExpr& expr() const { return expr_; }
  const std::optional<HighPrecision>& value() const { return value_; }
  const std::string& text() const { return text_; }
  // Canonical rendering for exact answers, normalized text otherwise.
  std::string display() const;

 private:
  Kind kind_ = Kind::kMissing;
  AnswerExpr expr_;
  std::optional<HighPrecision> value_;
  std::string text_;
};

struct EquivalenceOptions {
  bool numeric_fallback = true;
  double relative_tolerance = 1e-12;
};

bool equivalent(const AnswerExpr& a, const AnswerExpr& b);
bool equivalent(const AnswerKey& a, const AnswerKey& b,
                const EquivalenceOptions& options = {});

// |a - b| <= tol * max(1, |a|, |b|)
bool numerically_close(const HighPrecision& a, const HighPrecision& b,
                       double relative_tolerance);

}  // namespace idsample
