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
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cecgap/autodiff.hpp"

namespace cecgap {

/// Finite disturbance set with per-value probabilities. The disturbance is
/// required to have zero mean and unit variance so that the uncertainty
/// level sigma acts as a standard deviation.
struct NoiseSet {
  std::vector<double> values;
  std::vector<double> probs;

  int size() const { return static_cast<int>(values.size()); }
};

inline void validate_noise(const NoiseSet& noise) {
  if (noise.values.empty() || noise.values.size() != noise.probs.size())
    throw std::invalid_argument("noise set must be non-empty with matching probabilities");
  double sum = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < noise.values.size(); ++i) {
    if (noise.probs[i] < 0.0) throw std::invalid_argument("noise probabilities must be nonnegative");
    sum += noise.probs[i];
    mean += noise.probs[i] * noise.values[i];
    var += noise.probs[i] * noise.values[i] * noise.values[i];
  }
  if (std::abs(sum - 1.0) > 1e-15) throw std::invalid_argument("noise probabilities must sum to 1");
  if (std::abs(mean) > 1e-12) throw std::invalid_argument("noise must have zero mean");
  if (std::abs(var - 1.0) > 1e-12) throw std::invalid_argument("noise must have unit variance");
}

/// One classical Runge-Kutta step of x' = ode(x, u) with u held constant
/// over the step. Evaluates on plain reals and on AD scalars alike.
template <class S, class Ode>
S rk4_step(Ode&& ode, const S& x, const S& u, double h) {
  if (h <= 0.0) throw std::invalid_argument("rk4_step requires a positive step size");
  const S k1 = ode(x, u);
  const S k2 = ode(x + (h / 2.0) * k1, u);
  const S k3 = ode(x + (h / 2.0) * k2, u);
  const S k4 = ode(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Smooth overapproximation of the exact penalty max(0, -x):
/// phi_eps(x) = sqrt(x^2 + eps^2)/2 - x/2.
template <class S>
S smoothed_penalty(const S& x, double eps) {
  if (eps < 0.0) throw std::invalid_argument("smoothing parameter must be nonnegative");
  using std::sqrt;
  return 0.5 * sqrt(x * x + eps * eps) - 0.5 * x;
}

/// Unique nonnegative solution q~ of the scalar discrete algebraic Riccati
/// equation q~ = q + a^2 q~ - (a b q~)^2 / (r + b^2 q~), found by fixed-point
/// iteration from q~ = q. Throws if the iteration does not settle, which
/// happens exactly when (a, b) is not stabilizable.
inline double riccati_terminal_weight(double q, double r, double a, double b) {
  if (r <= 0.0) throw std::invalid_argument("control weight r must be positive");
  if (q < 0.0) throw std::invalid_argument("state weight q must be nonnegative");
  double p = q;
  constexpr long kMaxIters = 1'000'000;
  for (long it = 0; it < kMaxIters; ++it) {
    const double ab = a * b * p;
    const double next = q + a * a * p - ab * ab / (r + b * b * p);
    const double residual = next - p;
    p = next;
    if (std::abs(residual) <= 1e-12) return p;
    if (!std::isfinite(p)) break;
  }
  throw std::runtime_error("Riccati fixed-point iteration did not converge (non-stabilizable pair?)");
}

/// Parameters of the scalar benchmark problem: continuous-time drift
/// x' = x + x^3 + u discretized by one RK4 step of size t_span/horizon,
/// quadratic tracking costs plus a smoothed penalty keeping x >= x_lb.
struct BenchmarkParams {
  double t_span = 2.0;
  int horizon = 10;
  double x_lb = -0.1;
  double q = 5.0;
  double r = 1.0;
  double rho = 10.0;
  double eps = 1e-2;

  double step() const { return t_span / horizon; }
};

inline void validate_params(const BenchmarkParams& p) {
  if (p.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (p.t_span <= 0.0) throw std::invalid_argument("time span must be positive");
  if (p.r <= 0.0) throw std::invalid_argument("control weight r must be positive");
  if (p.q < 0.0) throw std::invalid_argument("state weight q must be nonnegative");
  if (p.rho < 0.0) throw std::invalid_argument("penalty weight rho must be nonnegative");
  if (p.eps <= 0.0) throw std::invalid_argument("smoothing parameter eps must be positive");
}

namespace detail {
template <class S>
S cubic_drift(const S& x, const S& u) {
  return x + x * x * x + u;
}
}  // namespace detail

/// Discrete dynamics of the benchmark: one RK4 step of the cubic drift plus
/// additive noise w (callers pass the effective disturbance sigma * w).
template <class S>
S benchmark_dynamics(const S& x, const S& u, const S& w, double h) {
  return rk4_step(detail::cubic_drift<S>, x, u, h) + w;
}

/// Scalar benchmark model. Immutable after construction; the terminal
/// weight comes from the infinite-horizon Riccati equation of the dynamics
/// linearized at the origin (linearization computed by AD, not hand-coded).
class BenchmarkModel {
 public:
  explicit BenchmarkModel(BenchmarkParams params = {}) : params_(params) {
    validate_params(params_);
    noise_ = NoiseSet{{-1.0, 1.0}, {0.5, 0.5}};
    validate_noise(noise_);
    const Dual1<double> fx = benchmark_dynamics<Dual1<double>>({0.0, 1.0}, 0.0, 0.0, params_.step());
    const Dual1<double> fu = benchmark_dynamics<Dual1<double>>(0.0, {0.0, 1.0}, 0.0, params_.step());
    lin_a_ = fx.deriv;
    lin_b_ = fu.deriv;
    terminal_weight_ = riccati_terminal_weight(params_.q, params_.r, lin_a_, lin_b_);
  }

  template <class S>
  S dynamics(const S& x, const S& u, const S& w) const {
    return benchmark_dynamics(x, u, w, params_.step());
  }

  template <class S>
  S stage_cost(const S& x, const S& u) const {
    return params_.q * x * x + params_.r * u * u + params_.rho * smoothed_penalty(x - params_.x_lb, params_.eps);
  }

  template <class S>
  S terminal_cost(const S& x) const {
    return terminal_weight_ * x * x + params_.rho * smoothed_penalty(x - params_.x_lb, params_.eps);
  }

  int horizon() const { return params_.horizon; }
  const NoiseSet& noise() const { return noise_; }
  const BenchmarkParams& params() const { return params_; }
  double terminal_weight() const { return terminal_weight_; }
  double lin_a() const { return lin_a_; }
  double lin_b() const { return lin_b_; }
  int state_dim() const { return 1; }
  int control_dim() const { return 1; }
  int noise_dim() const { return 1; }

 private:
  BenchmarkParams params_;
  NoiseSet noise_;
  double lin_a_ = 0.0;
  double lin_b_ = 0.0;
  double terminal_weight_ = 0.0;
};

/// Scalar linear-quadratic reference model x+ = a x + b u + w with costs
/// q x^2, r u^2 and Riccati terminal weight. The nominal policy is optimal
/// for the stochastic problem here, which makes the model the natural
/// cross-check for every certainty-equivalence test.
class LqModel {
 public:
  LqModel(double a, double b, double q, double r, int horizon)
      : a_(a), b_(b), q_(q), r_(r), horizon_(horizon) {
    if (horizon_ < 1) throw std::invalid_argument("horizon must be at least 1");
    if (r_ <= 0.0) throw std::invalid_argument("control weight r must be positive");
    terminal_weight_ = riccati_terminal_weight(q_, r_, a_, b_);
    noise_ = NoiseSet{{-1.0, 1.0}, {0.5, 0.5}};
    validate_noise(noise_);
  }

  template <class S>
  S dynamics(const S& x, const S& u, const S& w) const {
    return a_ * x + b_ * u + w;
  }

  template <class S>
  S stage_cost(const S& x, const S& u) const {
    return q_ * x * x + r_ * u * u;
  }

  template <class S>
  S terminal_cost(const S& x) const {
    return terminal_weight_ * x * x;
  }

  int horizon() const { return horizon_; }
  const NoiseSet& noise() const { return noise_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double q() const { return q_; }
  double r() const { return r_; }
  double terminal_weight() const { return terminal_weight_; }
  int state_dim() const { return 1; }
  int control_dim() const { return 1; }
  int noise_dim() const { return 1; }

 private:
  double a_, b_, q_, r_;
  int horizon_;
  double terminal_weight_ = 0.0;
  NoiseSet noise_;
};

inline LqModel make_lq_model(double a, double b, double q, double r, int horizon) {
  return LqModel(a, b, q, r, horizon);
}

/// A model is anything evaluable on plain reals with the scalar state,
/// control and disturbance signature used throughout this library.
template <class M>
concept ScalarModel = requires(const M m, double x) {
  { m.template dynamics<double>(x, x, x) } -> std::convertible_to<double>;
  { m.template stage_cost<double>(x, x) } -> std::convertible_to<double>;
  { m.template terminal_cost<double>(x) } -> std::convertible_to<double>;
  { m.horizon() } -> std::convertible_to<int>;
  { m.noise() } -> std::convertible_to<const NoiseSet&>;
};

}  // namespace cecgap
