#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace ctrac {

inline constexpr int kMaxDim = 8;

// Truncated Taylor value: a scalar plus its partials in up to kMaxDim
// directions. Nesting (JetT<JetT<double>>) gives second-order jets. Used to
// push exact metric/field derivatives through the curvature and connection
// formulas, so residual tests never depend on finite differences.
//
// Operators adopt the larger dimension of their operands: entries of the
// derivative array may be default-constructed (dimension 0) and still combine
// correctly with seeded jets.
template <class S>
struct JetT {
  S v{};
  int n = 0;
  std::array<S, kMaxDim> d{};

  JetT() = default;
  JetT(S value, int dim) : v(std::move(value)), n(dim) {}
};

template <class S>
JetT<S> operator+(const JetT<S>& a, const JetT<S>& b) {
  JetT<S> r(a.v + b.v, std::max(a.n, b.n));
  for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
template <class S>
JetT<S> operator-(const JetT<S>& a, const JetT<S>& b) {
  JetT<S> r(a.v - b.v, std::max(a.n, b.n));
  for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
template <class S>
JetT<S>& operator+=(JetT<S>& a, const JetT<S>& b) {
  a = a + b;
  return a;
}
template <class S>
JetT<S>& operator-=(JetT<S>& a, const JetT<S>& b) {
  a = a - b;
  return a;
}
template <class S>
JetT<S> operator-(const JetT<S>& a) {
  JetT<S> r(-a.v, a.n);
  for (int i = 0; i < a.n; ++i) r.d[i] = -a.d[i];
  return r;
}
template <class S>
JetT<S> operator*(const JetT<S>& a, const JetT<S>& b) {
  JetT<S> r(a.v * b.v, std::max(a.n, b.n));
  for (int i = 0; i < r.n; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <class S>
JetT<S> operator/(const JetT<S>& a, const JetT<S>& b) {
  JetT<S> r(a.v / b.v, std::max(a.n, b.n));
  for (int i = 0; i < r.n; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
  return r;
}
template <class S>
JetT<S> operator*(double c, const JetT<S>& a) {
  JetT<S> r(c * a.v, a.n);
  for (int i = 0; i < a.n; ++i) r.d[i] = c * a.d[i];
  return r;
}
template <class S>
JetT<S> operator*(const JetT<S>& a, double c) { return c * a; }
template <class S>
JetT<S> operator/(const JetT<S>& a, double c) { return (1.0 / c) * a; }

inline double jexp(double x) { return std::exp(x); }
template <class S>
JetT<S> jexp(const JetT<S>& a) {
  S e = jexp(a.v);
  JetT<S> r(e, a.n);
  for (int i = 0; i < a.n; ++i) r.d[i] = e * a.d[i];
  return r;
}

inline double jsqrt(double x) { return std::sqrt(x); }
template <class S>
JetT<S> jsqrt(const JetT<S>& a) {
  S s = jsqrt(a.v);
  JetT<S> r(s, a.n);
  for (int i = 0; i < a.n; ++i) r.d[i] = a.d[i] / (2.0 * s);
  return r;
}

using Jet = JetT<double>;
using Jet2 = JetT<Jet>;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }
inline double value_of(const Jet2& x) { return x.v.v; }

// demote a Jet2 to the Jet it carries as its value
inline Jet jet_of(const Jet2& x) { return x.v; }

}  // namespace ctrac
