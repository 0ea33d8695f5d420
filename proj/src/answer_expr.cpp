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

#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "idsample/checker.h"

namespace idsample {

namespace mp = boost::multiprecision;

namespace {

constexpr std::uint64_t kMaxExactRadicand = 1'000'000'000'000'000'000ULL;
constexpr std::uint64_t kTrialDivisionLimit = 1'000'000;
constexpr std::size_t kMaxRadicalBasis = 64;
constexpr long kMaxRationalExponent = 1024;
constexpr long kMaxRadicalExponent = 64;

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// n = outside^2 * inside with inside squarefree.
std::pair<std::uint64_t, std::uint64_t> split_square(std::uint64_t n) {
  std::uint64_t outside = 1;
  std::uint64_t inside = 1;
  std::uint64_t p = 2;
  for (; p <= kTrialDivisionLimit && p * p <= n; p += (p == 2 ? 1 : 2)) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) outside *= p;
    if (e % 2 == 1) inside *= p;
  }
  if (n > 1) {
    // Either the loop proved n prime (p*p > n), or every prime factor of n
    // exceeds the trial limit; with n <= 1e18 that leaves q, q*r or q^2.
    const std::uint64_t s = isqrt(n);
    if (s * s == n) {
      outside *= s;
    } else {
      inside *= n;
    }
  }
  return {outside, inside};
}

// sqrt(a) * sqrt(b) = gcd(a, b) * sqrt(a * b / gcd^2) for squarefree a, b.
std::pair<BigInt, BigInt> multiply_radicals(const BigInt& a, const BigInt& b) {
  const BigInt g = mp::gcd(a, b);
  return {g, (a / g) * (b / g)};
}

HighPrecision to_high_precision(const Rational& r) {
  return HighPrecision(mp::numerator(r)) / HighPrecision(mp::denominator(r));
}

std::string rational_to_string(const Rational& r) {
  std::string s = mp::numerator(r).str();
  if (mp::denominator(r) != 1) s += "/" + mp::denominator(r).str();
  return s;
}

// Solves m * x = rhs over the rationals; m must be nonsingular.
std::vector<Rational> solve_linear(std::vector<std::vector<Rational>> m,
                                   std::vector<Rational> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) throw UnparseableAnswer("division by zero");
    std::swap(m[pivot], m[col]);
    std::swap(rhs[pivot], rhs[col]);
    const Rational inv = 1 / m[col][col];
    for (std::size_t j = col; j < n; ++j) m[col][j] *= inv;
    rhs[col] *= inv;
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || m[row][col] == 0) continue;
      const Rational factor = m[row][col];
      for (std::size_t j = col; j < n; ++j) m[row][j] -= factor * m[col][j];
      rhs[row] -= factor * rhs[col];
    }
  }
  return rhs;
}

}  // namespace

void AnswerExpr::add_term(const BigInt& radicand, const Rational& coefficient) {
  if (coefficient == 0) return;
  auto [it, inserted] = terms_.emplace(radicand, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0) terms_.erase(it);
  }
}

AnswerExpr AnswerExpr::from_rational(const Rational& value) {
  AnswerExpr e;
  e.add_term(1, value);
  return e;
}

AnswerExpr AnswerExpr::sqrt_of(const Rational& value) {
  if (value < 0) {
    throw UnparseableAnswer("square root of a negative number");
  }
  if (value == 0) return AnswerExpr{};
  // sqrt(p/q) = sqrt(p*q) / q
  const BigInt& q = mp::denominator(value);
  const BigInt pq = mp::numerator(value) * q;
  if (pq > kMaxExactRadicand) {
    throw UnparseableAnswer("radicand too large for exact normalization");
  }
  const auto [outside, inside] = split_square(pq.convert_to<std::uint64_t>());
  AnswerExpr e;
  e.add_term(BigInt(inside), Rational(BigInt(outside), q));
  return e;
}

bool AnswerExpr::is_rational() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 1);
}

Rational AnswerExpr::rational_value() const {
  if (terms_.empty()) return Rational(0);
  return terms_.begin()->second;
}

AnswerExpr AnswerExpr::operator-() const {
  AnswerExpr e = *this;
  for (auto& [d, c] : e.terms_) c = -c;
  return e;
}

AnswerExpr operator+(const AnswerExpr& a, const AnswerExpr& b) {
  AnswerExpr e = a;
  for (const auto& [d, c] : b.terms_) e.add_term(d, c);
  return e;
}

AnswerExpr operator-(const AnswerExpr& a, const AnswerExpr& b) {
  return a + (-b);
}

AnswerExpr operator*(const AnswerExpr& a, const AnswerExpr& b) {
  AnswerExpr e;
  for (const auto& [da, ca] : a.terms_) {
    for (const auto& [db, cb] : b.terms_) {
      const auto [outside, inside] = multiply_radicals(da, db);
      e.add_term(inside, ca * cb * outside);
    }
  }
  return e;
}

AnswerExpr operator/(const AnswerExpr& a, const AnswerExpr& b) {
  return a * b.inverse();
}

AnswerExpr AnswerExpr::inverse() const {
  if (is_zero()) throw UnparseableAnswer("division by zero");
  if (terms_.size() == 1) {
    // 1 / (c sqrt d) = sqrt(d) / (c d)
    const auto& [d, c] = *terms_.begin();
    AnswerExpr e;
    e.add_term(d, 1 / (c * d));
    return e;
  }
  // The radicals reachable by multiplying this value's radicals form a finite
  // group; x = 1/this is the unique solution of this * x = 1 in its span.
  std::set<BigInt> closure{BigInt(1)};
  for (const auto& [d, c] : terms_) {
    std::vector<BigInt> added;
    for (const auto& s : closure) added.push_back(multiply_radicals(s, d).second);
    closure.insert(added.begin(), added.end());
    if (closure.size() > kMaxRadicalBasis) {
      throw UnparseableAnswer("too many independent radicals to rationalize");
    }
  }
  const std::vector<BigInt> basis(closure.begin(), closure.end());
  std::map<BigInt, std::size_t> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = i;

  const std::size_t n = basis.size();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
  for (std::size_t col = 0; col < n; ++col) {
    for (const auto& [d, c] : terms_) {
      const auto [outside, inside] = multiply_radicals(d, basis[col]);
      m[index.at(inside)][col] += c * outside;
    }
  }
  std::vector<Rational> rhs(n);
  rhs[index.at(BigInt(1))] = 1;
  const std::vector<Rational> x = solve_linear(std::move(m), std::move(rhs));

  AnswerExpr e;
  for (std::size_t i = 0; i < n; ++i) e.add_term(basis[i], x[i]);
  return e;
}

AnswerExpr AnswerExpr::pow(long exponent) const {
  const long limit = is_rational() ? kMaxRationalExponent : kMaxRadicalExponent;
  if (exponent > limit || exponent < -limit) {
    throw UnparseableAnswer("exponent too large for exact evaluation");
  }
  if (exponent < 0) return inverse().pow(-exponent);
  AnswerExpr result = from_rational(1);
  AnswerExpr base = *this;
  for (long e = exponent; e > 0; e >>= 1) {
    if (e & 1) result = result * base;
    if (e > 1) base = base * base;
  }
  return result;
}

std::string AnswerExpr::render() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [d, c] : terms_) {
    const bool negative = c < 0;
    const Rational magnitude = negative ? Rational(-c) : c;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    if (d == 1) {
      out += rational_to_string(magnitude);
    } else if (magnitude == 1) {
      out += "sqrt(" + d.str() + ")";
    } else {
      out += rational_to_string(magnitude) + "*sqrt(" + d.str() + ")";
    }
  }
  return out;
}

HighPrecision AnswerExpr::evaluate() const {
  HighPrecision total = 0;
  for (const auto& [d, c] : terms_) {
    HighPrecision term = to_high_precision(c);
    if (d != 1) term *= mp::sqrt(HighPrecision(d));
    total += term;
  }
  return total;
}

bool equivalent(const AnswerExpr& a, const AnswerExpr& b) { return a == b; }

bool numerically_close(const HighPrecision& a, const HighPrecision& b,
                       double relative_tolerance) {
  HighPrecision scale = 1;
  if (mp::abs(a) > scale) scale = mp::abs(a);
  if (mp::abs(b) > scale) scale = mp::abs(b);
  return mp::abs(a - b) <= HighPrecision(relative_tolerance) * scale;
}

}  // namespace idsample
