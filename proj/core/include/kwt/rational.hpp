#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "kwt/errors.hpp"

namespace kwt {

// Exact rational arithmetic on int64 numerator/denominator. Knowledge scores,
// sample weights, and count-ratio metrics are all small rationals; keeping
// them exact until rendering eliminates 100x percent/fraction bugs and makes
// round-trip tests bitwise.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw ValidationError("rational with zero denominator");
    normalize();
  }
  static Rational from_int(std::int64_t v) { return Rational(v, 1); }

  // Parses a plain decimal literal such as "47.13" or "-0.5" exactly.
  static Rational from_decimal(const std::string& text) {
    if (text.empty()) throw ParseError("empty decimal literal");
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
      negative = text[pos] == '-';
      ++pos;
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool any_digit = false;
    bool seen_dot = false;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c == '.') {
        if (seen_dot) throw ParseError("malformed decimal literal: " + text);
        seen_dot = true;
        continue;
      }
      if (c < '0' || c > '9')
        throw ParseError("malformed decimal literal: " + text);
      any_digit = true;
      num = checked_mul(num, 10) + (c - '0');
      if (seen_dot) den = checked_mul(den, 10);
    }
    if (!any_digit) throw ParseError("malformed decimal literal: " + text);
    return Rational(negative ? -num : num, den);
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator+(const Rational& o) const {
    return Rational(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator-(const Rational& o) const {
    return Rational(checked_sub(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                    checked_mul(den_, o.den_));
  }
  Rational operator*(const Rational& o) const {
    return Rational(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw ValidationError("rational division by zero");
    return Rational(checked_mul(num_, o.den_), checked_mul(den_, o.num_));
  }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
  }
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  static std::int64_t narrow(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw ValidationError("rational arithmetic overflow");
    return static_cast<std::int64_t>(v);
  }
  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    return narrow(static_cast<__int128>(a) * b);
  }
  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    return narrow(static_cast<__int128>(a) + b);
  }
  static std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    return narrow(static_cast<__int128>(a) - b);
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace kwt
