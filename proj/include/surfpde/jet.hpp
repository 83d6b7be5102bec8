#pragma once

#include <cmath>

namespace surfpde {

/// Second-order forward-mode value in two independent variables.
///
/// Carries f, the gradient df/dpsi and the Hessian d2f/dpsi2, so composing
/// a parameterization with a test function yields exact parametric
/// derivatives up to second order.
struct Jet2 {
  double v = 0.0;
  double d[2] = {0.0, 0.0};
  double h[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: implicit constant promotion

  static Jet2 variable(double value, int which) {
    Jet2 j(value);
    j.d[which] = 1.0;
    return j;
  }
};

namespace detail {
// Chain rule for a scalar function g applied to a jet: g(a), g'(a), g''(a).
inline Jet2 chain(const Jet2& a, double g0, double g1, double g2) {
  Jet2 r;
  r.v = g0;
  for (int i = 0; i < 2; ++i) {
    r.d[i] = g1 * a.d[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = g1 * a.h[i][j] + g2 * a.d[i] * a.d[j];
  }
  return r;
}
}  // namespace detail

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v + b.v;
  for (int i = 0; i < 2; ++i) {
    r.d[i] = a.d[i] + b.d[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r;
  r.v = -a.v;
  for (int i = 0; i < 2; ++i) {
    r.d[i] = -a.d[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = -a.h[i][j];
  }
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  for (int i = 0; i < 2; ++i) {
    r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    for (int j = 0; j < 2; ++j)
      r.h[i][j] = a.h[i][j] * b.v + a.d[i] * b.d[j] + a.d[j] * b.d[i] + a.v * b.h[i][j];
  }
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double inv = 1.0 / b.v;
  return a * detail::chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2& operator+=(Jet2& a, const Jet2& b) { return a = a + b; }
inline Jet2& operator-=(Jet2& a, const Jet2& b) { return a = a - b; }
inline Jet2& operator*=(Jet2& a, const Jet2& b) { return a = a * b; }

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return detail::chain(a, s, c, -s);
}

inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return detail::chain(a, c, -s, -c);
}

inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return detail::chain(a, e, e, e);
}

inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

}  // namespace surfpde
