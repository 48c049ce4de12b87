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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cecgap/autodiff.hpp"
#include "cecgap/model.hpp"
#include "cecgap/parallel.hpp"

namespace cecgap {

/// Uniform grid on [lo, hi].
struct Grid1D {
  double lo = -2.0;
  double hi = 2.0;
  int points = 2001;

  double spacing() const { return (hi - lo) / (points - 1); }
  double point(int j) const { return lo + (hi - lo) * j / (points - 1); }
};

inline void validate_grid(const Grid1D& g) {
  if (!(g.lo < g.hi)) throw std::invalid_argument("grid bounds must satisfy lo < hi");
  if (g.points < 2) throw std::invalid_argument("grid needs at least 2 points");
}

/// Tally of evaluations outside the grid; such queries are clamped to the
/// nearest edge and counted here instead of failing the whole backup.
struct ClampStats {
  std::int64_t count = 0;
  double max_excess = 0.0;

  void merge(const ClampStats& other) {
    count += other.count;
    max_excess = std::max(max_excess, other.max_excess);
  }
};

namespace detail {

inline void pin_value(double& r, double v) { r = v; }
inline void pin_value(Dual2& r, double v) { r.value = v; }
template <class T>
void pin_value(Dual1<T>& r, double v) {
  pin_value(r.value, v);
}

// Tangent estimate at node j: fourth-order centered stencil where the grid
// allows it, lower-order formulas toward the edges. Exact for cubics on the
// interior, for quadratics everywhere.
inline double node_slope(std::span<const double> v, int j, double h) {
  const int n = static_cast<int>(v.size());
  if (n == 2) return (v[1] - v[0]) / h;
  if (j >= 2 && j <= n - 3)
    return (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
  if (j == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  if (j == n - 1) return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return (v[j + 1] - v[j - 1]) / (2.0 * h);
}

}  // namespace detail

/// C1 piecewise-cubic interpolation of a gridded table: Hermite cells with
/// finite-difference tangents. Exact on the grid points; reproduces cubics
/// on uniform interior cells. Queries outside [lo, hi] are clamped to the
/// edge value (and logged when stats are supplied).
template <class S>
S interpolate(std::span<const double> table, const Grid1D& grid, const S& x, ClampStats* stats = nullptr) {
  const int n = grid.points;
  if (static_cast<int>(table.size()) != n) throw std::invalid_argument("table size does not match the grid");
  const double h = grid.spacing();
  const double xv = value_of(x);

  if (xv < grid.lo || xv > grid.hi || !std::isfinite(xv)) {
    if (stats) {
      ++stats->count;
      const double excess = !std::isfinite(xv) ? std::numeric_limits<double>::infinity()
                                               : std::max(grid.lo - xv, xv - grid.hi);
      stats->max_excess = std::max(stats->max_excess, excess);
    }
    return S(xv <= grid.lo ? table[0] : table[static_cast<std::size_t>(n - 1)]);
  }

  int cell = static_cast<int>(std::floor((xv - grid.lo) / h));
  cell = std::clamp(cell, 0, n - 2);
  if (cell + 1 <= n - 2 && xv == grid.point(cell + 1)) ++cell;  // grid hits evaluate at t = 0

  const double m0 = detail::node_slope(table, cell, h);
  const double m1 = detail::node_slope(table, cell + 1, h);
  const S t = (x - grid.point(cell)) / h;
  const S t2 = t * t;
  const S t3 = t2 * t;
  S result = (2.0 * t3 - 3.0 * t2 + 1.0) * table[static_cast<std::size_t>(cell)] +
             (t3 - 2.0 * t2 + t) * (h * m0) +
             (3.0 * t2 - 2.0 * t3) * table[static_cast<std::size_t>(cell + 1)] +
             (t3 - t2) * (h * m1);
  if (xv == grid.point(cell)) detail::pin_value(result, table[static_cast<std::size_t>(cell)]);
  else if (xv == grid.point(cell + 1)) detail::pin_value(result, table[static_cast<std::size_t>(cell + 1)]);
  return result;
}

enum class DpKind { optimal, policy_evaluation };

struct DpFailure {
  int stage = 0;
  int grid_index = 0;
  double x = 0.0;
  std::string reason;
};

/// Per-stage value and policy tables produced by the dynamic-programming
/// recursion on the grid.
struct DpTables {
  Grid1D grid;
  double sigma = 0.0;
  DpKind kind = DpKind::optimal;
  std::vector<std::vector<double>> value;   // stages 0..N
  std::vector<std::vector<double>> policy;  // stages 0..N-1 (empty for the terminal stage)
  std::vector<DpFailure> failures;
  ClampStats clamps;

  int stages() const { return static_cast<int>(value.size()) - 1; }
  double value_at(int stage, double x) const {
    return interpolate<double>(value[static_cast<std::size_t>(stage)], grid, x);
  }
  double policy_at(int stage, double x) const {
    return interpolate<double>(policy[static_cast<std::size_t>(stage)], grid, x);
  }
};

struct DpOptions {
  int workers = 1;
  double deriv_tol = 1e-12;     // |dQ/du| at which the inner minimization stops
  double expand_limit = 1e6;    // bracket search cap as a multiple of the seed scale
  int max_inner_iters = 200;
};

/// State-action value on the grid: stage cost plus the expected interpolated
/// cost-to-go over the disturbance set.
template <ScalarModel Model, class S>
S dp_q_value(const Model& model, std::span<const double> v_next, const Grid1D& grid,
             double x, const S& u, double sigma, ClampStats* stats = nullptr) {
  S acc = model.stage_cost(S(x), u);
  const NoiseSet& noise = model.noise();
  for (std::size_t i = 0; i < noise.values.size(); ++i) {
    const S next = model.dynamics(S(x), u, S(sigma * noise.values[i]));
    acc += noise.probs[i] * interpolate(v_next, grid, next, stats);
  }
  return acc;
}

namespace detail {

struct ScalarMin {
  double u = 0.0;
  double value = 0.0;
  double curvature = 0.0;
};

// Safeguarded 1-D Newton on dQ/du: expand from the seed until the derivative
// changes sign, then alternate Newton steps with bisection inside the
// bracket. Returns nothing if no bracket exists within the expansion cap.
template <class QFunc>
std::optional<ScalarMin> minimize_from_seed(QFunc&& q, double seed, double scale, const DpOptions& opts) {
  const auto eval = [&](double u) { return q(Dual2{u, 1.0, 0.0}); };

  Dual2 at = eval(seed);
  double a = seed;
  if (std::abs(at.d1) <= opts.deriv_tol) return ScalarMin{a, at.value, at.d2};

  const double dir = at.d1 > 0.0 ? -1.0 : 1.0;
  const double cap = opts.expand_limit * scale;
  double step = 0.25 * scale;
  double b = a;
  Dual2 bt = at;
  bool bracketed = false;
  while (std::abs(b) < cap) {
    a = b;
    at = bt;
    b = a + dir * step;
    step *= 2.0;
    bt = eval(b);
    if ((at.d1 < 0.0) != (bt.d1 < 0.0)) {
      bracketed = true;
      break;
    }
    if (std::abs(bt.d1) <= opts.deriv_tol) return ScalarMin{b, bt.value, bt.d2};
  }
  if (!bracketed) return std::nullopt;

  double lo = a, hi = b;
  double dlo = at.d1;
  if (dlo > 0.0) {
    std::swap(lo, hi);
  }
  double u = 0.5 * (lo + hi);
  Dual2 cur = eval(u);
  for (int it = 0; it < opts.max_inner_iters; ++it) {
    if (std::abs(cur.d1) <= opts.deriv_tol) break;
    if (cur.d1 < 0.0) lo = u;
    else hi = u;
    double next;
    if (cur.d2 > 0.0) {
      next = u - cur.d1 / cur.d2;
      const double lb = std::min(lo, hi), ub = std::max(lo, hi);
      if (!(next > lb && next < ub)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - u) <= 1e-15 * (1.0 + std::abs(u))) {
      u = next;
      cur = eval(u);
      break;
    }
    u = next;
    cur = eval(u);
  }
  return ScalarMin{u, cur.value, cur.d2};
}

template <class QFunc>
std::optional<ScalarMin> minimize_scalar(QFunc&& q, double x, const DpOptions& opts) {
  const double scale = std::max(1.0, std::abs(x));
  std::optional<ScalarMin> best;
  for (double base : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    auto candidate = minimize_from_seed(q, base * scale, scale, opts);
    if (candidate && (!best || candidate->value < best->value)) best = candidate;
  }
  return best;
}

}  // namespace detail

/// One Bellman backup on the grid: at every grid point, minimize the
/// state-action value over the control, storing the minimizer in pi_out and
/// the composed value Q(x, pi(x)) in v_out.
template <ScalarModel Model>
void dp_backup(const Model& model, std::span<const double> v_next, const Grid1D& grid, double sigma,
               std::span<double> v_out, std::span<double> pi_out, int stage,
               const DpOptions& opts, std::vector<DpFailure>& failures, ClampStats& clamps) {
  const int n = grid.points;
  std::vector<ClampStats> local_clamps(static_cast<std::size_t>(n));
  std::vector<std::string> local_failures(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), opts.workers, [&](std::size_t j) {
    const double x = grid.point(static_cast<int>(j));
    ClampStats* cl = &local_clamps[j];
    const auto q = [&](const auto& u) { return dp_q_value(model, v_next, grid, x, u, sigma, cl); };
    const auto best = detail::minimize_scalar(q, x, opts);
    if (!best) {
      local_failures[j] = "no stationary point found within the control search range";
      v_out[j] = std::numeric_limits<double>::quiet_NaN();
      pi_out[j] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    if (!(best->curvature > 0.0)) {
      local_failures[j] = "second-order condition failed at the inner minimizer";
    }
    pi_out[j] = best->u;
    v_out[j] = dp_q_value(model, v_next, grid, x, best->u, sigma, cl);
  });

  for (int j = 0; j < n; ++j) {
    clamps.merge(local_clamps[static_cast<std::size_t>(j)]);
    if (!local_failures[static_cast<std::size_t>(j)].empty())
      failures.push_back({stage, j, grid.point(j), local_failures[static_cast<std::size_t>(j)]});
  }
}

/// Policy-evaluation backup: no minimization, the fixed policy is plugged
/// into the state-action value point by point.
template <ScalarModel Model>
void dp_policy_backup(const Model& model, std::span<const double> v_next, std::span<const double> pi_fixed,
                      const Grid1D& grid, double sigma, std::span<double> v_out,
                      const DpOptions& opts, ClampStats& clamps) {
  const int n = grid.points;
  std::vector<ClampStats> local_clamps(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), opts.workers, [&](std::size_t j) {
    const double x = grid.point(static_cast<int>(j));
    v_out[j] = dp_q_value(model, v_next, grid, x, pi_fixed[j], sigma, &local_clamps[j]);
  });
  for (const auto& cl : local_clamps) clamps.merge(cl);
}

/// Full backward recursion for the optimal value function: N backups
/// starting from the terminal cost sampled on the grid.
template <ScalarModel Model>
DpTables dp_solve(const Model& model, const Grid1D& grid, double sigma, int stages,
                  const DpOptions& opts = {}) {
  validate_grid(grid);
  if (stages < 0) throw std::invalid_argument("stage count must be nonnegative");

  DpTables tables;
  tables.grid = grid;
  tables.sigma = sigma;
  tables.kind = DpKind::optimal;
  tables.value.assign(static_cast<std::size_t>(stages) + 1, std::vector<double>(static_cast<std::size_t>(grid.points)));
  tables.policy.assign(static_cast<std::size_t>(stages), std::vector<double>(static_cast<std::size_t>(grid.points)));

  auto& terminal = tables.value[static_cast<std::size_t>(stages)];
  for (int j = 0; j < grid.points; ++j)
    terminal[static_cast<std::size_t>(j)] = model.template terminal_cost<double>(grid.point(j));

  for (int k = stages - 1; k >= 0; --k) {
    dp_backup(model, tables.value[static_cast<std::size_t>(k) + 1], grid, sigma,
              std::span<double>(tables.value[static_cast<std::size_t>(k)]),
              std::span<double>(tables.policy[static_cast<std::size_t>(k)]),
              k, opts, tables.failures, tables.clamps);
  }
  return tables;
}

/// Evaluates the certainty-equivalent policy on the grid: the policy tables
/// of the noise-free recursion are re-evaluated under uncertainty sigma via
/// policy backups.
template <ScalarModel Model>
DpTables dp_evaluate_cec(const Model& model, const Grid1D& grid, double sigma, int stages,
                         const DpOptions& opts = {}, const DpTables* nominal_tables = nullptr) {
  DpTables base;
  if (nominal_tables == nullptr) {
    base = dp_solve(model, grid, 0.0, stages, opts);
    nominal_tables = &base;
  }
  if (nominal_tables->stages() != stages || nominal_tables->sigma != 0.0 ||
      nominal_tables->kind != DpKind::optimal)
    throw std::invalid_argument("nominal tables must come from dp_solve at sigma = 0");

  DpTables tables;
  tables.grid = grid;
  tables.sigma = sigma;
  tables.kind = DpKind::policy_evaluation;
  tables.policy = nominal_tables->policy;
  tables.failures = nominal_tables->failures;
  tables.value.assign(static_cast<std::size_t>(stages) + 1, std::vector<double>(static_cast<std::size_t>(grid.points)));

  auto& terminal = tables.value[static_cast<std::size_t>(stages)];
  for (int j = 0; j < grid.points; ++j)
    terminal[static_cast<std::size_t>(j)] = model.template terminal_cost<double>(grid.point(j));

  for (int k = stages - 1; k >= 0; --k) {
    dp_policy_backup(model, tables.value[static_cast<std::size_t>(k) + 1],
                     tables.policy[static_cast<std::size_t>(k)], grid, sigma,
                     std::span<double>(tables.value[static_cast<std::size_t>(k)]),
                     opts, tables.clamps);
  }
  return tables;
}

}  // namespace cecgap
