#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hopex {

// Exact fraction with 64-bit components.  Threshold comparisons in the
// clustering decomposition are done in integers so that block sizes and drop
// bounds come out exactly, not within a float tolerance.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  explicit Rational(long long n) : num(n), den(1) {}

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    Rational x(a.num, b.den);            // cross-reduce before multiplying to
    Rational y(b.num, a.den);            // keep components small
    return Rational(x.num * y.num, x.den * y.den);
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
};

// ceil(num/den) for positive den.
inline long long ceil_div(long long num, long long den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return q;
}

// Parse "p/q" or a bare integer "p".
inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(text));
  return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

}  // namespace hopex
