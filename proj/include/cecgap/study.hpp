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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cecgap/cec.hpp"
#include "cecgap/parallel.hpp"
#include "cecgap/solver.hpp"
#include "cecgap/tree.hpp"

namespace cecgap {

/// One study point: optimal and certainty-equivalent cost from the same
/// initial state and uncertainty level, with the root controls both policies
/// commit to.
struct ScalingRecord {
  double x = 0.0;
  double sigma = 0.0;
  double v_star = 0.0;
  double v_cec = 0.0;
  double delta_v = 0.0;       // v_cec - v_star
  double u_star_root = 0.0;
  double u_cec_root = 0.0;
  double control_gap = 0.0;   // |u_cec_root - u_star_root|
};

struct StudyFailure {
  double x = 0.0;
  double sigma = 0.0;
  std::string what;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int n_points = 0;
};

/// Computes one record per (x, sigma) pair, x-major, sigma in input order.
/// A record that fails to converge is dropped with a diagnostic instead of
/// aborting the rest of the study.
template <ScalarModel Model>
std::vector<ScalingRecord> run_scaling_study(const Model& model, std::span<const double> x_values,
                                             std::span<const double> sigma_values,
                                             const SolverOptions& opts = {}, int workers = 1,
                                             std::vector<StudyFailure>* failures = nullptr) {
  for (double s : sigma_values) {
    if (!(s > 0.0)) throw std::invalid_argument("scaling study requires strictly positive sigma values");
  }
  const ScenarioTree tree = build_tree_for(model);

  const std::size_t total = x_values.size() * sigma_values.size();
  std::vector<std::optional<ScalingRecord>> slots(total);
  std::vector<std::string> errors(total);

  parallel_for(total, workers, [&](std::size_t idx) {
    const double x = x_values[idx / sigma_values.size()];
    const double sigma = sigma_values[idx % sigma_values.size()];
    try {
      const TreeSolution star = solve_tree(model, tree, x, sigma, opts);
      if (!star.converged) throw std::runtime_error("tree solve did not converge");
      const CecEvaluation cec = evaluate_cec(model, tree, x, sigma, opts);
      ScalingRecord rec;
      rec.x = x;
      rec.sigma = sigma;
      rec.v_star = star.value;
      rec.v_cec = cec.value;
      rec.delta_v = cec.value - star.value;
      rec.u_star_root = star.root_control;
      rec.u_cec_root = cec.root_control;
      rec.control_gap = std::abs(cec.root_control - star.root_control);
      slots[idx] = rec;
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  });

  std::vector<ScalingRecord> records;
  records.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (slots[idx]) {
      records.push_back(*slots[idx]);
    } else if (failures) {
      failures->push_back({x_values[idx / sigma_values.size()],
                           sigma_values[idx % sigma_values.size()], errors[idx]});
    }
  }
  return records;
}

/// Least-squares line through (log sigma, log y) over the pairs inside the
/// window with y > 0. Throws when fewer than 3 usable pairs remain; an
/// all-nonpositive input signals values at the solver noise floor.
inline SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> pairs,
                                 double sigma_min, double sigma_max) {
  std::vector<std::pair<double, double>> logs;
  int in_window = 0;
  for (const auto& [sigma, y] : pairs) {
    if (sigma < sigma_min || sigma > sigma_max) continue;
    ++in_window;
    if (y > 0.0) logs.emplace_back(std::log(sigma), std::log(y));
  }
  if (in_window > 0 && logs.empty())
    throw std::domain_error("all values in the fit window are nonpositive (at the solver noise floor?)");
  if (logs.size() < 3)
    throw std::invalid_argument("log-log fit needs at least 3 positive pairs inside the window");

  double sx = 0, sy = 0;
  for (const auto& [lx, ly] : logs) {
    sx += lx;
    sy += ly;
  }
  const double n = static_cast<double>(logs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double pred = fit.intercept + fit.slope * lx;
    ss_res += (ly - pred) * (ly - pred);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.sigma_min = sigma_min;
  fit.sigma_max = sigma_max;
  fit.n_points = static_cast<int>(logs.size());
  return fit;
}

/// Central difference of the optimal root control across +sigma/-sigma.
/// Vanishing first-order sensitivity of the policy at sigma = 0 makes these
/// differences shrink (for a symmetric disturbance set they are zero up to
/// solver tolerance by the relabeling symmetry).
template <ScalarModel Model>
std::vector<std::pair<double, double>> policy_sensitivity_check(
    const Model& model, const ScenarioTree& tree, double x,
    std::span<const double> sigma_values, const SolverOptions& opts = {}) {
  double prev = std::numeric_limits<double>::infinity();
  for (double s : sigma_values) {
    if (!(s > 0.0)) throw std::invalid_argument("policy sensitivity check requires positive sigma values");
    if (!(s < prev)) throw std::invalid_argument("sigma values must be strictly decreasing");
    prev = s;
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(sigma_values.size());
  for (double sigma : sigma_values) {
    const TreeSolution plus = solve_tree(model, tree, x, sigma, opts);
    const TreeSolution minus = solve_tree(model, tree, x, -sigma, opts);
    if (!plus.converged || !minus.converged)
      throw std::runtime_error("tree solve did not converge in the sensitivity check");
    out.emplace_back(sigma, (plus.root_control - minus.root_control) / (2.0 * sigma));
  }
  return out;
}

struct LocalSlope {
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double sigma_mid = 0.0;  // geometric midpoint
  double slope = 0.0;
};

/// Slopes between consecutive (sigma, y) pairs on log-log axes.
inline std::vector<LocalSlope> local_loglog_slopes(std::span<const std::pair<double, double>> pairs) {
  std::vector<LocalSlope> out;
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const auto& [s0, y0] = pairs[i];
    const auto& [s1, y1] = pairs[i + 1];
    if (!(y0 > 0.0) || !(y1 > 0.0)) continue;
    LocalSlope ls;
    ls.sigma_lo = s0;
    ls.sigma_hi = s1;
    ls.sigma_mid = std::sqrt(s0 * s1);
    ls.slope = std::log(y1 / y0) / std::log(s1 / s0);
    out.push_back(ls);
  }
  return out;
}

/// First sigma (interval midpoint) at which the local slope drops below the
/// threshold, if any.
inline std::optional<double> first_slope_breakdown(std::span<const LocalSlope> slopes, double threshold) {
  for (const auto& ls : slopes) {
    if (ls.slope < threshold) return ls.sigma_mid;
  }
  return std::nullopt;
}

struct BreakdownScan {
  std::vector<ScalingRecord> records;
  std::vector<LocalSlope> slopes;
  std::optional<double> breakdown_sigma;
  double threshold = 3.5;
};

/// Scans the suboptimality over a sigma range and locates where its local
/// log-log slope first drops below 3.5 -- the point where higher-order terms
/// start to dominate the quartic law.
template <ScalarModel Model>
BreakdownScan breakdown_scan(const Model& model, double x, std::span<const double> sigma_values,
                             const SolverOptions& opts = {}, int workers = 1) {
  if (sigma_values.size() < 8)
    throw std::invalid_argument("breakdown scan needs at least 8 sigma values");
  double prev = 0.0;
  for (double s : sigma_values) {
    if (!(s > prev)) throw std::invalid_argument("sigma values must be positive and strictly increasing");
    prev = s;
  }

  BreakdownScan scan;
  const double xs[] = {x};
  scan.records = run_scaling_study(model, xs, sigma_values, opts, workers);
  if (scan.records.size() != sigma_values.size())
    throw std::runtime_error("breakdown scan lost records to solver failures");

  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(scan.records.size());
  for (const auto& rec : scan.records) pairs.emplace_back(rec.sigma, rec.delta_v);
  scan.slopes = local_loglog_slopes(pairs);
  scan.breakdown_sigma = first_slope_breakdown(scan.slopes, scan.threshold);
  return scan;
}

}  // namespace cecgap
