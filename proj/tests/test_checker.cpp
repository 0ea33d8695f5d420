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

#include <random>

#include "checker_fuzz.h"
#include "doctest.h"
#include "idsample/checker.h"

using namespace idsample;
using idsample::testing::Oracle;
using idsample::testing::Tree;
using idsample::testing::TreePtr;

namespace {

bool same(std::string_view a, std::string_view b) {
  return equivalent(AnswerKey::from_text(a), AnswerKey::from_text(b));
}

bool oracle_close(const Oracle& a, const Oracle& b, const char* tol) {
  using std::max;
  return abs(a - b) <= Oracle(tol) * max({Oracle(1), abs(a), abs(b)});
}

// Squarefree decomposition n = c^2 * d by trial division.
std::pair<long, long> square_split(long n) {
  long c = 1, d = 1;
  for (long p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) c *= p;
    if (e % 2) d *= p;
  }
  return {c, d * n};
}

}  // namespace

TEST_CASE("canonical forms") {
  CHECK(parse_expr("1/sqrt(3)").render() == "1/3*sqrt(3)");
  CHECK(parse_expr("\\frac{2}{4}").render() == "1/2");
  CHECK(parse_expr("sqrt(12)").render() == "2*sqrt(3)");
  CHECK(parse_expr("0").render() == "0");
  CHECK(parse_expr("3 - 3").is_zero());
  CHECK(parse_expr("1/2 + 2\\sqrt{3}").render() == "1/2 + 2*sqrt(3)");
  CHECK(parse_expr("\\frac12").render() == "1/2");
  CHECK(parse_expr("0.25").render() == "1/4");
  CHECK(parse_expr("007").render() == "7");
  CHECK(parse_expr("0.05").render() == "1/20");
  CHECK(parse_expr(".5").render() == "1/2");
  CHECK(parse_expr("2^-3").render() == "1/8");
  CHECK(parse_expr("x = \\dfrac{\\sqrt{3}}{3}.").render() == "1/3*sqrt(3)");
  CHECK(parse_expr("(1+\\sqrt{2})^{2}").render() == "3 + 2*sqrt(2)");
  CHECK(parse_expr("\\frac{1}{1+\\sqrt{2}}").render() == "-1 + sqrt(2)");
  CHECK(parse_expr("4^{1/2}").render() == "2");
  // 2 * sqrt(3) squared is 12.
  const AnswerExpr two_root3 = parse_expr("sqrt(12)");
  CHECK((two_root3 * two_root3) == AnswerExpr::from_rational(12));
}

TEST_CASE("equivalence examples") {
  CHECK(same("1/\\sqrt{3}", "\\frac{\\sqrt{3}}{3}"));
  CHECK(same("1/sqrt(3)", "sqrt(3)/3"));
  CHECK(same("\\sqrt{2} + \\sqrt{8}", "3\\sqrt{2}"));
  CHECK(same("\\frac{2}{4}", "0.5"));
  CHECK_FALSE(same("1/2", "1/3"));
  CHECK_FALSE(same("\\sqrt{2}", "1.41421356"));
  // Outside the exact grammar the numeric path decides.
  CHECK(same("\\pi", "3.14159265358979323846264338327950288"));
  CHECK(same("\\sqrt[3]{8}", "2"));
  CHECK(same("2^{1/3}", "\\sqrt[3]{2}"));
  CHECK_FALSE(same("\\pi", "3.14159"));
  // Opaque answers compare as normalized text.
  CHECK(same("(1, 2)", "  (1,  2) "));
  CHECK_FALSE(same("(1, 2)", "(2, 1)"));
  CHECK(same("$\\text{yes}$", "\\text{yes}"));
}

TEST_CASE("missing answers match nothing") {
  const AnswerKey none = AnswerKey::from_raw(RawAnswer{});
  CHECK(none.kind() == AnswerKey::Kind::kMissing);
  CHECK_FALSE(equivalent(none, none));
  CHECK_FALSE(equivalent(none, AnswerKey::from_text("1")));
  CHECK(AnswerKey::from_text("   ").kind() == AnswerKey::Kind::kMissing);
}

TEST_CASE("answer kinds") {
  CHECK(AnswerKey::from_text("3/4").kind() == AnswerKey::Kind::kExact);
  CHECK(AnswerKey::from_text("2\\pi").kind() == AnswerKey::Kind::kNumeric);
  CHECK(AnswerKey::from_text("\\text{(B)}").kind() == AnswerKey::Kind::kOpaque);
  CHECK_THROWS_AS(parse_expr("1/0"), UnparseableAnswer);
  CHECK_THROWS_AS(parse_expr("sqrt(-4)"), UnparseableAnswer);
  CHECK_THROWS_AS(parse_expr("x+1"), UnparseableAnswer);
  CHECK_THROWS_AS(parse_expr(""), UnparseableAnswer);
  CHECK_THROWS_AS(parse_expr("(1+2"), UnparseableAnswer);
}

TEST_CASE("final answer extraction") {
  auto r = extract_final_answer("so therefore \\boxed{42}.");
  CHECK(r.text == "42");
  CHECK(r.origin == AnswerOrigin::kBoxed);
  r = extract_final_answer("\\boxed{1/2} hmm, rethink. \\boxed{1/3}");
  CHECK(r.text == "1/3");
  r = extract_final_answer("Answer: \\frac{\\sqrt{3}}{3}");
  CHECK(r.text == "\\frac{\\sqrt{3}}{3}");
  CHECK(r.origin == AnswerOrigin::kAnswerLine);
  r = extract_final_answer("\\boxed{\\frac{1}{2}}");
  CHECK(r.text == "\\frac{1}{2}");
  r = extract_final_answer("no answer here");
  CHECK(r.origin == AnswerOrigin::kNone);
  CHECK(r.text.empty());
  r = extract_final_answer("\\boxed{12");  // unbalanced
  CHECK(r.origin == AnswerOrigin::kNone);
  CHECK(r.text.empty());
}

TEST_CASE("extraction survives adversarial text") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "\\boxed{}answer: \n\\fbox";
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    const int len = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int j = 0; j < len; ++j) {
      s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    }
    const RawAnswer r = extract_final_answer(s);
    if (r.origin == AnswerOrigin::kNone) CHECK(r.text.empty());
    CHECK_NOTHROW(AnswerKey::from_raw(r));
  }
}

TEST_CASE("fuzz: canonicalization is idempotent, notation-independent and numerically sound") {
  std::mt19937_64 rng(20260101);
  int parsed = 0;
  for (int i = 0; i < 10000; ++i) {
    const TreePtr t = testing::random_tree(rng, 3);
    Oracle expected;
    try {
      expected = testing::oracle_value(*t);
    } catch (const std::domain_error&) {
      CHECK_THROWS_AS(parse_expr(testing::render_plain(*t)), UnparseableAnswer);
      continue;
    }
    const std::string plain = testing::render_plain(*t);
    INFO(plain);
    AnswerExpr e;
    REQUIRE_NOTHROW(e = parse_expr(plain));
    ++parsed;
    CHECK(parse_expr(testing::render_latex(*t)) == e);
    CHECK(parse_expr(e.render()) == e);
    const Oracle got(e.evaluate());
    CHECK(oracle_close(got, expected, "1e-25"));
  }
  CHECK(parsed > 9000);
}

TEST_CASE("fuzz: equivalence is an equivalence relation that matches value equality") {
  std::mt19937_64 rng(77);
  // Shallow trees collide often, so equal values are well represented.
  std::vector<std::pair<AnswerKey, Oracle>> pool;
  while (pool.size() < 150) {
    const TreePtr t = testing::random_tree(rng, 2);
    try {
      const Oracle v = testing::oracle_value(*t);
      const std::string text = std::uniform_int_distribution<int>(0, 1)(rng)
                                   ? testing::render_plain(*t)
                                   : testing::render_latex(*t);
      pool.emplace_back(AnswerKey::from_text(text), v);
    } catch (const std::domain_error&) {
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  int equal_pairs = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& [a, va] = pool[pick(rng)];
    const auto& [b, vb] = pool[pick(rng)];
    const auto& [c, vc] = pool[pick(rng)];
    REQUIRE(a.kind() == AnswerKey::Kind::kExact);
    CHECK(equivalent(a, a));
    const bool ab = equivalent(a, b);
    CHECK(ab == equivalent(b, a));
    if (ab && equivalent(b, c)) CHECK(equivalent(a, c));
    // Exact path is sound and complete against 100-digit evaluation.
    CHECK(ab == oracle_close(va, vb, "1e-60"));
    if (ab) {
      ++equal_pairs;
      CHECK(numerically_close(*a.value(), *b.value(), 1e-12));
    }
  }
  CHECK(equal_pairs > 100);
}

TEST_CASE("radical normalization agrees with integer factorization") {
  std::mt19937_64 rng(9);
  std::vector<long> ns;
  for (long n = 0; n <= 3000; ++n) ns.push_back(n);
  for (int i = 0; i < 3000; ++i) ns.push_back(std::uniform_int_distribution<long>(1, 1'000'000)(rng));
  for (long n : ns) {
    const AnswerExpr e = AnswerExpr::sqrt_of(n);
    if (n == 0) {
      CHECK(e.is_zero());
      continue;
    }
    const auto [c, d] = square_split(n);
    REQUIRE(e.terms().size() == 1);
    const auto& [radicand, coef] = *e.terms().begin();
    CHECK(radicand == d);
    CHECK(coef == c);
    CHECK(e * e == AnswerExpr::from_rational(n));
  }
}

TEST_CASE("large radicands") {
  // 999983 is prime; its square times 2 still normalizes exactly.
  const long long p = 999983;
  const AnswerExpr e = AnswerExpr::sqrt_of(Rational(p) * p * 2);
  CHECK(e.render() == std::to_string(p) + "*sqrt(2)");
  CHECK(AnswerExpr::sqrt_of(Rational(1, 8)).render() == "1/4*sqrt(2)");
  CHECK_THROWS_AS(AnswerExpr::sqrt_of(-1), UnparseableAnswer);
}

TEST_CASE("normalize_answer_text is idempotent") {
  for (std::string_view s : {"  a   b ", "$x$", "$$ 1 $$", "\t(1,\n 2)\t", ""}) {
    const std::string once = normalize_answer_text(s);
    CHECK(normalize_answer_text(once) == once);
  }
  CHECK(normalize_answer_text("  $1 +  2$ ") == "1 + 2");
}
