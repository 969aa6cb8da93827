#pragma once

// Forward-mode scalar types used to differentiate frame and map evaluators.
//
//   Jet2   : value, gradient and Hessian in up to kMaxVars variables.
//   Series : univariate Taylor polynomial truncated at a runtime degree.
//
// Both are plain value types; generic evaluators are written once as
// templates over the scalar and instantiated for double, Jet2 and Series.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "heatlocus/errors.hpp"

namespace heatlocus {

inline constexpr int kMaxVars = 6;

class Jet2 {
 public:
  Jet2() = default;
  Jet2(double v) : v_(v) {}  // NOLINT(implicit): constants promote silently.

  /// Independent variable number `index` among `nvars`.
  static Jet2 variable(double v, int index, int nvars) {
    Jet2 j(v);
    j.n_ = nvars;
    j.g_[index] = 1.0;
    return j;
  }

  double value() const { return v_; }
  double grad(int i) const { return g_[i]; }
  double hess(int i, int j) const { return h_[i][j]; }
  int nvars() const { return n_; }

  /// f(u) given f, f' and f'' at the current value.
  Jet2 chain(double f0, double f1, double f2) const {
    Jet2 r(f0);
    r.n_ = n_;
    for (int i = 0; i < n_; ++i) r.g_[i] = f1 * g_[i];
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r.h_[i][j] = f1 * h_[i][j] + f2 * g_[i] * g_[j];
    return r;
  }

  Jet2 operator-() const { return chain(-v_, -1.0, 0.0); }

  Jet2& operator+=(const Jet2& o) {
    widen(o.n_);
    v_ += o.v_;
    for (int i = 0; i < o.n_; ++i) {
      g_[i] += o.g_[i];
      for (int j = 0; j < o.n_; ++j) h_[i][j] += o.h_[i][j];
    }
    return *this;
  }
  Jet2& operator-=(const Jet2& o) { return *this += -o; }
  Jet2& operator*=(const Jet2& o) { return *this = *this * o; }
  Jet2& operator/=(const Jet2& o) { return *this = *this / o; }

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }

  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r(a.v_ * b.v_);
    r.n_ = a.n_ > b.n_ ? a.n_ : b.n_;
    for (int i = 0; i < r.n_; ++i) r.g_[i] = a.g_[i] * b.v_ + b.g_[i] * a.v_;
    for (int i = 0; i < r.n_; ++i)
      for (int j = 0; j < r.n_; ++j)
        r.h_[i][j] = a.h_[i][j] * b.v_ + b.h_[i][j] * a.v_ + a.g_[i] * b.g_[j] + b.g_[i] * a.g_[j];
    return r;
  }

  friend Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double inv = 1.0 / b.v_;
    return a * b.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  friend Jet2 sin(const Jet2& x) { return x.chain(std::sin(x.v_), std::cos(x.v_), -std::sin(x.v_)); }
  friend Jet2 cos(const Jet2& x) { return x.chain(std::cos(x.v_), -std::sin(x.v_), -std::cos(x.v_)); }
  friend Jet2 exp(const Jet2& x) {
    const double e = std::exp(x.v_);
    return x.chain(e, e, e);
  }
  friend Jet2 log(const Jet2& x) { return x.chain(std::log(x.v_), 1.0 / x.v_, -1.0 / (x.v_ * x.v_)); }
  friend Jet2 sqrt(const Jet2& x) {
    const double s = std::sqrt(x.v_);
    return x.chain(s, 0.5 / s, -0.25 / (s * x.v_));
  }
  friend Jet2 cosh(const Jet2& x) { return x.chain(std::cosh(x.v_), std::sinh(x.v_), std::cosh(x.v_)); }
  friend Jet2 sinh(const Jet2& x) { return x.chain(std::sinh(x.v_), std::cosh(x.v_), std::sinh(x.v_)); }
  friend Jet2 pow(const Jet2& x, double p) {
    if (p == 0.0) return Jet2(1.0);
    return x.chain(std::pow(x.v_, p), p * std::pow(x.v_, p - 1.0), p * (p - 1.0) * std::pow(x.v_, p - 2.0));
  }

 private:
  void widen(int n) {
    if (n > n_) n_ = n;
  }

  double v_ = 0.0;
  int n_ = 0;
  std::array<double, kMaxVars> g_{};
  std::array<std::array<double, kMaxVars>, kMaxVars> h_{};
};

/// Truncated univariate power series c_0 + c_1 s + ... + c_d s^d.
class Series {
 public:
  Series() = default;
  Series(double c) : c_(1, c) {}  // NOLINT(implicit)
  Series(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  static Series constant(double c, int degree) {
    Series s;
    s.c_.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    s.c_[0] = c;
    return s;
  }
  /// c + s (the identity series shifted by c).
  static Series variable(double c, int degree) {
    Series s = constant(c, degree);
    if (degree >= 1) s.c_[1] = 1.0;
    return s;
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }
  double& operator[](int k) { return c_[k]; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  const std::vector<double>& coeffs() const { return c_; }

  Series operator-() const {
    Series r = *this;
    for (double& x : r.c_) x = -x;
    return r;
  }
  Series& operator+=(const Series& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Series& operator-=(const Series& o) { return *this += -o; }
  Series& operator*=(const Series& o) { return *this = *this * o; }
  Series& operator/=(const Series& o) { return *this = *this / o; }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }

  friend Series operator*(const Series& a, const Series& b) {
    const int d = common_degree(a, b);
    Series r = constant(0.0, d);
    for (int i = 0; i <= d; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      for (int j = 0; i + j <= d; ++j) r.c_[i + j] += ai * b[j];
    }
    return r;
  }

  friend Series operator/(const Series& a, const Series& b) {
    require(b[0] != 0.0, ErrorKind::Domain, "series division by a series vanishing at 0");
    const int d = common_degree(a, b);
    Series q = constant(0.0, d);
    for (int k = 0; k <= d; ++k) {
      double acc = a[k];
      for (int j = 1; j <= k; ++j) acc -= b[j] * q.c_[k - j];
      q.c_[k] = acc / b[0];
    }
    return q;
  }

  friend Series exp(const Series& a) {
    const int d = a.degree();
    Series e = constant(std::exp(a[0]), d);
    // e' = a' e
    for (int k = 1; k <= d; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= k; ++j) acc += j * a[j] * e.c_[k - j];
      e.c_[k] = acc / k;
    }
    return e;
  }

  friend Series log(const Series& a) {
    require(a[0] > 0.0, ErrorKind::Domain, "series log of non-positive constant term");
    const int d = a.degree();
    Series l = constant(std::log(a[0]), d);
    // a l' = a'
    for (int k = 1; k <= d; ++k) {
      double acc = k * a[k];
      for (int j = 1; j < k; ++j) acc -= j * l.c_[j] * a[k - j];
      l.c_[k] = acc / (k * a[0]);
    }
    return l;
  }

  friend void sincos(const Series& a, Series& s, Series& c) {
    const int d = a.degree();
    s = constant(std::sin(a[0]), d);
    c = constant(std::cos(a[0]), d);
    for (int k = 1; k <= d; ++k) {
      double as = 0.0, ac = 0.0;
      for (int j = 1; j <= k; ++j) {
        as += j * a[j] * c.c_[k - j];
        ac -= j * a[j] * s.c_[k - j];
      }
      s.c_[k] = as / k;
      c.c_[k] = ac / k;
    }
  }
  friend Series sin(const Series& a) {
    Series s, c;
    sincos(a, s, c);
    return s;
  }
  friend Series cos(const Series& a) {
    Series s, c;
    sincos(a, s, c);
    return c;
  }
  friend Series cosh(const Series& a) { return (exp(a) + exp(-a)) * Series(0.5); }
  friend Series sinh(const Series& a) { return (exp(a) - exp(-a)) * Series(0.5); }

  /// a^p for real p; needs a(0) > 0 unless p is a non-negative integer.
  friend Series pow(const Series& a, double p) {
    const int d = a.degree();
    if (p == std::round(p) && p >= 0.0) {
      Series r = constant(1.0, d);
      Series base = a;
      auto e = static_cast<long>(p);
      while (e > 0) {
        if (e & 1) r = r * base;
        e >>= 1;
        if (e > 0) base = base * base;
      }
      return r;
    }
    require(a[0] > 0.0, ErrorKind::Domain, "series power of non-positive constant term");
    Series y = constant(std::pow(a[0], p), d);
    // a y' = p a' y
    for (int k = 1; k <= d; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= k; ++j) acc += (p * j - (k - j)) * a[j] * y.c_[k - j];
      y.c_[k] = acc / (k * a[0]);
    }
    return y;
  }
  friend Series sqrt(const Series& a) { return pow(a, 0.5); }

 private:
  static int common_degree(const Series& a, const Series& b) {
    // A degree-0 operand is a constant and does not limit truncation.
    if (a.degree() <= 0) return b.degree() < 0 ? 0 : b.degree();
    if (b.degree() <= 0) return a.degree();
    return a.degree() < b.degree() ? a.degree() : b.degree();
  }

  std::vector<double> c_;
};

/// Uniform access to the primal value of any supported scalar.
inline double primal(double x) { return x; }
inline double primal(const Jet2& x) { return x.value(); }
inline double primal(const Series& x) { return x.value(); }

}  // namespace heatlocus
