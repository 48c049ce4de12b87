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
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cecgap/numeric.hpp"
#include "cecgap/parallel.hpp"
#include "cecgap/solver.hpp"
#include "cecgap/tree.hpp"

namespace cecgap {

struct CecNodeRecord {
  int stage = 0;
  std::int64_t node = 0;          // 1-based within the stage
  double state = 0.0;
  double control = std::numeric_limits<double>::quiet_NaN();  // NaN at leaves
  double cost = 0.0;              // probability-weighted cost contribution
};

struct CecEvaluation {
  double value = 0.0;             // expected closed-loop cost of the nominal MPC policy
  double root_control = 0.0;      // first control of the root solve; independent of sigma
  std::vector<CecNodeRecord> nodes;  // one record per state node, in stage-major order
  int solve_count = 0;
  long total_newton_iters = 0;
  double max_grad_norm = 0.0;
};

/// First control of the deterministic solve from x0 over the full horizon --
/// the control the certainty-equivalent policy commits to.
template <ScalarModel Model>
double cec_root_control(const Model& model, double x0, int steps, const SolverOptions& opts = {}) {
  const NominalSolution sol = solve_nominal(model, x0, steps, opts);
  if (!sol.converged)
    throw std::runtime_error("nominal solve did not converge at the root state");
  return sol.u_traj.empty() ? 0.0 : sol.u_traj[0];
}

namespace detail {

template <ScalarModel Model>
struct CecWalker {
  const Model* model;
  const ScenarioTree* tree;
  double sigma;
  const SolverOptions* opts;
  std::vector<CecNodeRecord>* nodes;
  Accum<double> cost;
  int solve_count = 0;
  long newton_iters = 0;
  double max_grad = 0.0;

  // Depth-first walk: re-solve the deterministic problem over the remaining
  // horizon at every state node, apply its first control, branch over the
  // disturbance set. Children are warm-started from the parent solution
  // shifted by one stage.
  void walk(int stage, std::int64_t node, double x, std::span<const double> warm) {
    const int remaining = tree->horizon - stage;
    const auto g = static_cast<std::size_t>(tree->node_index(stage, node));
    if (remaining == 0) {
      const double term = tree->stage_prob[static_cast<std::size_t>(stage)] *
                          model->template terminal_cost<double>(x);
      (*nodes)[g] = {stage, node, x, std::numeric_limits<double>::quiet_NaN(), term};
      cost.add(term);
      return;
    }

    const NominalSolution sol = solve_nominal(*model, x, remaining, *opts, warm);
    ++solve_count;
    newton_iters += sol.iters;
    max_grad = std::max(max_grad, sol.grad_norm);
    if (!sol.converged)
      throw std::runtime_error("nominal solve did not converge at stage " + std::to_string(stage) +
                               ", node " + std::to_string(node));

    const double u = sol.u_traj[0];
    const double term = tree->stage_prob[static_cast<std::size_t>(stage)] *
                        model->template stage_cost<double>(x, u);
    (*nodes)[g] = {stage, node, x, u, term};
    cost.add(term);

    const std::span<const double> shifted(sol.u_traj.data() + 1, sol.u_traj.size() - 1);
    for (int b = 1; b <= tree->branching; ++b) {
      const double w = sigma * tree->w_values[static_cast<std::size_t>(b - 1)];
      const double child_x = model->template dynamics<double>(x, u, w);
      walk(stage + 1, (node - 1) * tree->branching + b, child_x, shifted);
    }
  }
};

}  // namespace detail

/// Evaluates the certainty-equivalent policy on the stochastic system by
/// exhaustive enumeration of all disturbance histories. Subtrees below the
/// stage-1 nodes are independent; their partial sums are always combined in
/// branch order, so the result is bit-identical for any worker count.
template <ScalarModel Model>
CecEvaluation evaluate_cec(const Model& model, const ScenarioTree& tree, double x0, double sigma,
                           const SolverOptions& opts = {}, int workers = 1) {
  CecEvaluation out;
  out.nodes.resize(static_cast<std::size_t>(tree.state_count()));

  const NominalSolution root = solve_nominal(model, x0, tree.horizon, opts);
  if (!root.converged)
    throw std::runtime_error("nominal solve did not converge at the root state");
  out.root_control = root.u_traj[0];
  out.solve_count = 1;
  out.total_newton_iters = root.iters;
  out.max_grad_norm = root.grad_norm;

  const double root_term = model.template stage_cost<double>(x0, out.root_control);
  out.nodes[0] = {0, 1, x0, out.root_control, root_term};

  const int m = tree.branching;
  const std::span<const double> shifted(root.u_traj.data() + 1, root.u_traj.size() - 1);
  std::vector<detail::CecWalker<Model>> walkers(static_cast<std::size_t>(m));

  parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t bi) {
    const int b = static_cast<int>(bi) + 1;
    auto& walker = walkers[bi];
    walker = {&model, &tree, sigma, &opts, &out.nodes};
    const double w = sigma * tree.w_values[bi];
    const double child_x = model.template dynamics<double>(x0, out.root_control, w);
    walker.walk(1, b, child_x, shifted);
  });

  Accum<double> total;
  total.add(root_term);
  for (const auto& walker : walkers) {
    total.add(walker.cost.total());
    out.solve_count += walker.solve_count;
    out.total_newton_iters += walker.newton_iters;
    out.max_grad_norm = std::max(out.max_grad_norm, walker.max_grad);
  }
  out.value = total.total();
  return out;
}

}  // namespace cecgap
