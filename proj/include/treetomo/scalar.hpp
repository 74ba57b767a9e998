#pragma once

// Arithmetic back ends. Every algorithm in the library is a template over a
// scalar type; `double` is the Float64 mode and `Rational` (GMP mpq) is the
// exact mode.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "treetomo/error.hpp"

namespace treetomo {

using Rational = mpq_class;

enum class ArithmeticMode { Float64, ExactRational };

constexpr std::string_view to_string(ArithmeticMode mode) {
  return mode == ArithmeticMode::Float64 ? "float" : "rational";
}

inline ArithmeticMode parse_mode(std::string_view text) {
  if (text == "float") return ArithmeticMode::Float64;
  if (text == "rational") return ArithmeticMode::ExactRational;
  fail(ErrorCode::FormatError, "unknown arithmetic mode '" + std::string(text) + "'");
}

namespace detail {

// Exact value of a decimal literal (`-12.5e-3`) or a fraction (`7/10`).
inline Rational parse_rational_text(std::string_view text) {
  auto bad = [&]() -> Rational {
    fail(ErrorCode::FormatError, "malformed number '" + std::string(text) + "'");
  };
  if (text.empty()) return bad();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational q;
    std::string s(text);
    if (q.set_str(s, 10) != 0 || q.get_den() == 0) return bad();
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::string digits;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return bad();
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return bad();
    std::string exp_text(text.substr(i + 1));
    if (exp_text.empty()) return bad();
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      return bad();
    }
    if (used != exp_text.size()) return bad();
    exponent += e;
  }
  mpz_class numerator(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  Rational q = exponent >= 0 ? Rational(numerator * scale) : Rational(numerator, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace detail

template <class Scalar>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr ArithmeticMode mode = ArithmeticMode::Float64;
  static constexpr bool exact = false;

  static double from_double(double x) { return x; }
  static double from_ratio(long num, long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double to_double(double x) { return x; }

  static std::string format(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  static double parse(std::string_view text) {
    if (text.find('/') != std::string_view::npos) {
      return detail::parse_rational_text(text).get_d();
    }
    std::string s(text);
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(ErrorCode::FormatError, "malformed number '" + s + "'");
    }
    if (used != s.size()) fail(ErrorCode::FormatError, "malformed number '" + s + "'");
    return x;
  }
};

template <>
struct scalar_traits<Rational> {
  static constexpr ArithmeticMode mode = ArithmeticMode::ExactRational;
  static constexpr bool exact = true;

  static Rational from_double(double x) { return Rational(x); }
  static Rational from_ratio(long num, long den) {
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  static double to_double(const Rational& x) { return x.get_d(); }

  static std::string format(const Rational& x) { return x.get_str(10); }

  static Rational parse(std::string_view text) { return detail::parse_rational_text(text); }
};

template <class Scalar>
double to_double(const Scalar& x) {
  return scalar_traits<Scalar>::to_double(x);
}

template <class Scalar>
std::string format_scalar(const Scalar& x) {
  return scalar_traits<Scalar>::format(x);
}

template <class Scalar>
Scalar parse_scalar(std::string_view text) {
  return scalar_traits<Scalar>::parse(text);
}

}  // namespace treetomo
