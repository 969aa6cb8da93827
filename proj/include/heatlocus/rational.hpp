#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "heatlocus/errors.hpp"

namespace heatlocus {

/// Exact rational number, always stored in lowest terms with a positive denominator.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    require(b.num_ != 0, ErrorKind::InvalidInput, "rational division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// "p/q", or "p" when the denominator is 1.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "p/q" or "p".
  static Rational parse(const std::string& s) {
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(s));
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
      fail(ErrorKind::Parse, "malformed rational '" + s + "'");
    }
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  void assign(std::int64_t num, std::int64_t den) {
    require(den != 0, ErrorKind::InvalidInput, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
  }

  static Rational from_wide(__int128 num, __int128 den) {
    require(den != 0, ErrorKind::InvalidInput, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a == 0) a = 1;
    num /= a;
    den /= a;
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    require(num <= lim && -num <= lim && den <= lim, ErrorKind::InvalidInput, "rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace heatlocus
