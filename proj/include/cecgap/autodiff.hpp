/*
 Copyright 2026 The cecgap authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cecgap {

/// First-order forward-mode scalar: a value together with one directional
/// derivative. Supported elementary operations: +, -, *, /, sqrt and integer
/// powers. Nest as Dual1<Dual1<double>> to obtain mixed second derivatives.
template <class T>
struct Dual1 {
  T value{};
  T deriv{};

  Dual1() = default;
  Dual1(double v) : value(v), deriv() {}  // NOLINT: constants promote implicitly
  Dual1(T v, T d) : value(std::move(v)), deriv(std::move(d)) {}
};

/// Second-order forward-mode scalar along a single direction: value, first
/// and second directional derivative.
struct Dual2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  Dual2() = default;
  Dual2(double v) : value(v) {}  // NOLINT
  Dual2(double v, double first, double second) : value(v), d1(first), d2(second) {}
};

/// Extracts the plain value of a (possibly nested) AD scalar.
inline double value_of(double x) { return x; }
inline double value_of(const Dual2& x) { return x.value; }
template <class T>
double value_of(const Dual1<T>& x) {
  return value_of(x.value);
}

// ---------------------------------------------------------------------------
// Dual1 arithmetic
// ---------------------------------------------------------------------------

template <class T>
Dual1<T> operator+(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.value + b.value, a.deriv + b.deriv};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.value - b.value, a.deriv - b.deriv};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a) {
  return {-a.value, -a.deriv};
}
template <class T>
Dual1<T> operator*(const Dual1<T>& a, const Dual1<T>& b) {
  return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
template <class T>
Dual1<T> operator/(const Dual1<T>& a, const Dual1<T>& b) {
  if (value_of(b.value) == 0.0) throw std::domain_error("division by zero in dual arithmetic");
  const T q = a.value / b.value;
  return {q, (a.deriv - q * b.deriv) / b.value};
}

template <class T> Dual1<T> operator+(const Dual1<T>& a, double b) { return a + Dual1<T>(b); }
template <class T> Dual1<T> operator+(double a, const Dual1<T>& b) { return Dual1<T>(a) + b; }
template <class T> Dual1<T> operator-(const Dual1<T>& a, double b) { return a - Dual1<T>(b); }
template <class T> Dual1<T> operator-(double a, const Dual1<T>& b) { return Dual1<T>(a) - b; }
template <class T> Dual1<T> operator*(const Dual1<T>& a, double b) { return {a.value * b, a.deriv * b}; }
template <class T> Dual1<T> operator*(double a, const Dual1<T>& b) { return {b.value * a, b.deriv * a}; }
template <class T> Dual1<T> operator/(const Dual1<T>& a, double b) { return a / Dual1<T>(b); }
template <class T> Dual1<T> operator/(double a, const Dual1<T>& b) { return Dual1<T>(a) / b; }

template <class T> Dual1<T>& operator+=(Dual1<T>& a, const Dual1<T>& b) { a = a + b; return a; }
template <class T> Dual1<T>& operator-=(Dual1<T>& a, const Dual1<T>& b) { a = a - b; return a; }
template <class T> Dual1<T>& operator*=(Dual1<T>& a, const Dual1<T>& b) { a = a * b; return a; }

inline double sqrt_checked(double x) {
  if (x < 0.0) throw std::domain_error("sqrt of negative argument in dual arithmetic");
  return std::sqrt(x);
}

using std::sqrt;
template <class T>
Dual1<T> sqrt(const Dual1<T>& a) {
  if (value_of(a.value) < 0.0) throw std::domain_error("sqrt of negative argument in dual arithmetic");
  const T s = sqrt(a.value);
  return {s, a.deriv / (2.0 * s)};
}

// ---------------------------------------------------------------------------
// Dual2 arithmetic (univariate truncated Taylor order 2)
// ---------------------------------------------------------------------------

inline Dual2 operator+(const Dual2& a, const Dual2& b) { return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2}; }
inline Dual2 operator-(const Dual2& a, const Dual2& b) { return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2}; }
inline Dual2 operator-(const Dual2& a) { return {-a.value, -a.d1, -a.d2}; }
inline Dual2 operator*(const Dual2& a, const Dual2& b) {
  return {a.value * b.value,
          a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}
inline Dual2 operator/(const Dual2& a, const Dual2& b) {
  if (b.value == 0.0) throw std::domain_error("division by zero in dual arithmetic");
  const double q = a.value / b.value;
  const double q1 = (a.d1 - q * b.d1) / b.value;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
  return {q, q1, q2};
}

inline Dual2 operator+(const Dual2& a, double b) { return {a.value + b, a.d1, a.d2}; }
inline Dual2 operator+(double a, const Dual2& b) { return {a + b.value, b.d1, b.d2}; }
inline Dual2 operator-(const Dual2& a, double b) { return {a.value - b, a.d1, a.d2}; }
inline Dual2 operator-(double a, const Dual2& b) { return {a - b.value, -b.d1, -b.d2}; }
inline Dual2 operator*(const Dual2& a, double b) { return {a.value * b, a.d1 * b, a.d2 * b}; }
inline Dual2 operator*(double a, const Dual2& b) { return {a * b.value, a * b.d1, a * b.d2}; }
inline Dual2 operator/(const Dual2& a, double b) { return a / Dual2(b); }
inline Dual2 operator/(double a, const Dual2& b) { return Dual2(a) / b; }
inline Dual2& operator+=(Dual2& a, const Dual2& b) { a = a + b; return a; }
inline Dual2& operator-=(Dual2& a, const Dual2& b) { a = a - b; return a; }

inline Dual2 sqrt(const Dual2& a) {
  if (a.value < 0.0) throw std::domain_error("sqrt of negative argument in dual arithmetic");
  const double s = std::sqrt(a.value);
  const double s1 = a.d1 / (2.0 * s);
  return {s, s1, (a.d2 - 2.0 * s1 * s1) / (2.0 * s)};
}

/// Integer power by repeated multiplication; negative exponents go through
/// the guarded division.
template <class S>
S powi(const S& base, int exponent) {
  if (exponent < 0) return 1.0 / powi(base, -exponent);
  S result(1.0);
  S acc = base;
  int e = exponent;
  while (e > 0) {
    if (e & 1) result = result * acc;
    e >>= 1;
    if (e > 0) acc = acc * acc;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Derivative drivers
// ---------------------------------------------------------------------------

/// Gradient of a scalar field via n forward passes, one coordinate seed each.
/// `f` must accept a const std::vector<S>& for S in {double, Dual1<double>}.
template <class F>
std::vector<double> gradient(F&& f, std::span<const double> x) {
  std::vector<Dual1<double>> seeded(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    seeded[i].deriv = 1.0;
    grad[i] = f(seeded).deriv;
    seeded[i].deriv = 0.0;
  }
  return grad;
}

/// Hessian-vector product via forward-over-forward seeding: the inner dual
/// direction carries v, the outer one cycles through coordinates. No dense
/// Hessian is ever formed.
template <class F>
std::vector<double> hessian_vector(F&& f, std::span<const double> x, std::span<const double> v) {
  using D2 = Dual1<Dual1<double>>;
  std::vector<D2> seeded(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    seeded[j].value = Dual1<double>{x[j], v[j]};
    seeded[j].deriv = Dual1<double>{0.0, 0.0};
  }
  std::vector<double> hv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    seeded[i].deriv.value = 1.0;
    hv[i] = f(seeded).deriv.deriv;
    seeded[i].deriv.value = 0.0;
  }
  return hv;
}

}  // namespace cecgap
