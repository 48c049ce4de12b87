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
#include <cstddef>
#include <vector>

#include "cecgap/autodiff.hpp"

namespace cecgap {

/// Neumaier compensated accumulator. Summing a few thousand cost terms
/// naively would inject noise of the same magnitude as the smallest
/// suboptimality gaps this library measures.
template <class T>
struct Accum;

template <>
struct Accum<double> {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double total() const { return sum + comp; }
};

// Dual scalars accumulate componentwise (summation is linear).
template <class T>
struct Accum<Dual1<T>> {
  Accum<T> value;
  Accum<T> deriv;

  void add(const Dual1<T>& x) {
    value.add(x.value);
    deriv.add(x.deriv);
  }
  Dual1<T> total() const { return {value.total(), deriv.total()}; }
};

template <>
struct Accum<Dual2> {
  Accum<double> value, d1, d2;

  void add(const Dual2& x) {
    value.add(x.value);
    d1.add(x.d1);
    d2.add(x.d2);
  }
  Dual2 total() const { return {value.total(), d1.total(), d2.total()}; }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out = linspace(std::log(lo), std::log(hi), n);
  for (double& v : out) v = std::exp(v);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace cecgap
