// Copyright 2026 The cluster-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cluster_forge {

/// Exact rational, always kept in lowest terms with a positive denominator.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

/// "num/den", the serialized form for every exact value (integers carry "/1").
inline std::string format_exact(const Rational& value) {
  return boost::multiprecision::numerator(value).str() + "/" +
         boost::multiprecision::denominator(value).str();
}

inline double to_double(const Rational& value) { return value.convert_to<double>(); }
inline double to_double(double value) { return value; }

/// Parses "a/b" or a plain integer.
inline Rational parse_fraction(std::string_view text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) {
      return Rational(BigInt(std::string(text)));
    }
    const BigInt num(std::string(text.substr(0, slash)));
    const BigInt den(std::string(text.substr(slash + 1)));
    if (den == 0) throw std::domain_error("zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
  }
}

/// Parses a finite decimal literal such as "0.3" into its exact value 3/10.
inline Rational parse_decimal_exact(std::string_view text) {
  std::string digits;
  bool negative = false;
  std::size_t scale = 0;
  bool seen_point = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (i == 0 && (c == '-' || c == '+')) {
      negative = c == '-';
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) ++scale;
    } else {
      throw std::invalid_argument("not a decimal: '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw std::invalid_argument("not a decimal: '" + std::string(text) + "'");
  BigInt den = 1;
  for (std::size_t i = 0; i < scale; ++i) den *= 10;
  BigInt num(digits);
  if (negative) num = -num;
  return Rational(num, den);
}

/// A success probability given either exactly ("1/2") or as a decimal ("0.5").
/// Decimal input selects the floating-point evaluation path.
struct Probability {
  Rational exact;
  bool is_exact = true;

  double as_double() const { return to_double(exact); }
};

inline Probability parse_probability(std::string_view text) {
  Probability p;
  if (text.find('.') != std::string_view::npos || text.find('e') != std::string_view::npos) {
    p.exact = parse_decimal_exact(text);
    p.is_exact = false;
  } else {
    p.exact = parse_fraction(text);
  }
  if (p.exact <= 0 || p.exact > 1) {
    throw std::domain_error("success probability must lie in (0, 1], got " + std::string(text));
  }
  return p;
}

}  // namespace cluster_forge
