#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace distsynth {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Raised for invalid target specifications and malformed inputs.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

inline BigInt numer(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denom(const Rational& r) { return boost::multiprecision::denominator(r); }

// Canonical form: "p/q" in lowest terms, or just "p" when the denominator is 1.
inline std::string format_rational(const Rational& r) {
  const BigInt num = numer(r);
  const BigInt den = denom(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace detail {

inline BigInt parse_digits(std::string_view s, std::string_view whole) {
  if (s.empty()) throw SpecError("invalid rational: '" + std::string(whole) + "'");
  BigInt v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw SpecError("invalid rational: '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace detail

// Parses a nonnegative rational written as "p/q", an integer, or a decimal
// with optional exponent: "7/10", "3", "0.35", "1e-9". Exact, no rounding.
inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    const BigInt num = detail::parse_digits(text.substr(0, slash), text);
    const BigInt den = detail::parse_digits(text.substr(slash + 1), text);
    if (den == 0) throw SpecError("invalid rational (zero denominator): '" + std::string(text) + "'");
    return Rational(num, den);
  }

  std::string_view mantissa = text;
  long exponent = 0;
  const auto epos = text.find_first_of("eE");
  if (epos != std::string_view::npos) {
    mantissa = text.substr(0, epos);
    std::string_view es = text.substr(epos + 1);
    bool neg = false;
    if (!es.empty() && (es.front() == '+' || es.front() == '-')) {
      neg = es.front() == '-';
      es.remove_prefix(1);
    }
    const BigInt e = detail::parse_digits(es, text);
    if (e > 4096) throw SpecError("exponent out of range: '" + std::string(text) + "'");
    exponent = e.template convert_to<long>();
    if (neg) exponent = -exponent;
  }

  std::string_view int_part = mantissa;
  std::string_view frac_part;
  const auto dot = mantissa.find('.');
  if (dot != std::string_view::npos) {
    int_part = mantissa.substr(0, dot);
    frac_part = mantissa.substr(dot + 1);
    if (int_part.empty() && frac_part.empty())
      throw SpecError("invalid rational: '" + std::string(text) + "'");
  }
  BigInt digits = 0;
  if (!int_part.empty()) digits = detail::parse_digits(int_part, text);
  for (char c : frac_part) {
    if (c < '0' || c > '9') throw SpecError("invalid rational: '" + std::string(text) + "'");
    digits = digits * 10 + (c - '0');
  }
  if (int_part.empty() && frac_part.empty())
    throw SpecError("invalid rational: '" + std::string(text) + "'");

  const long shift = exponent - static_cast<long>(frac_part.size());
  BigInt scale = 1;
  for (long i = 0; i < (shift < 0 ? -shift : shift); ++i) scale *= 10;
  return shift >= 0 ? Rational(digits * scale) : Rational(digits, scale);
}

// Exact power of two, any sign of the exponent.
inline Rational pow2(int n) {
  if (n >= 0) return Rational(BigInt(1) << n);
  return Rational(1, BigInt(1) << -n);
}

// The index n of the dyadic interval (2^n, 2^(n+1)] containing v.
inline int dyadic_group(const Rational& v) {
  if (v <= 0) throw SpecError("dyadic_group requires a positive value");
  const long est = static_cast<long>(boost::multiprecision::msb(numer(v))) -
                   static_cast<long>(boost::multiprecision::msb(denom(v)));
  int n = static_cast<int>(est) - 2;
  while (!(pow2(n) < v)) --n;
  while (!(v <= pow2(n + 1))) ++n;
  return n;
}

}  // namespace distsynth
