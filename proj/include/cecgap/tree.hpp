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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cecgap/model.hpp"

namespace cecgap {

// Node indexing convention: nodes are 1-based within each stage, i = 1..m^k,
// and stored flat in stage-major order. The parent of node i at stage k+1 is
// node ceil(i/m) at stage k; siblings receive branch indices 1..m via
// ((i-1) mod m) + 1. Stage k carries probability weight (1/m)^k per node.

/// Parent of node i (1-based within its stage) in the previous stage.
inline std::int64_t parent_index(std::int64_t i, int m) {
  if (i < 1) throw std::out_of_range("node index must be >= 1");
  return (i - 1) / m + 1;
}

/// Branch index in {1..m} selecting the disturbance applied on the edge
/// into node i.
inline int disturbance_index(std::int64_t i, int m) {
  if (i < 1) throw std::out_of_range("node index must be >= 1");
  return static_cast<int>((i - 1) % m) + 1;
}

/// Scenario tree over a finite disturbance set: all reachable disturbance
/// histories up to the horizon, with m^k nodes at stage k. Immutable after
/// construction.
struct ScenarioTree {
  int branching = 1;                        // m
  int horizon = 0;                          // N
  std::vector<double> w_values;             // disturbance per branch, size m
  std::vector<std::int64_t> stage_offset;   // size horizon + 2; offset of first node per stage
  std::vector<double> stage_prob;           // (1/m)^k, size horizon + 1

  std::int64_t state_count() const { return stage_offset[static_cast<std::size_t>(horizon) + 1]; }
  std::int64_t control_count() const { return stage_offset[static_cast<std::size_t>(horizon)]; }
  std::int64_t stage_size(int k) const {
    return stage_offset[static_cast<std::size_t>(k) + 1] - stage_offset[static_cast<std::size_t>(k)];
  }
  /// Flat index of node i (1-based) at stage k.
  std::int64_t node_index(int k, std::int64_t i) const {
    return stage_offset[static_cast<std::size_t>(k)] + i - 1;
  }
};

/// Builds the scenario tree for a horizon and disturbance set. Only uniform
/// branch probabilities are supported; the node budget guards against the
/// exponential growth m^N.
inline ScenarioTree build_tree(int horizon, const NoiseSet& noise, std::int64_t node_budget = 1'000'000) {
  if (horizon < 1) throw std::invalid_argument("tree horizon must be at least 1");
  const int m = noise.size();
  if (m < 1) throw std::invalid_argument("disturbance set must be non-empty");
  for (double p : noise.probs) {
    if (std::abs(p - 1.0 / m) > 1e-15)
      throw std::invalid_argument("scenario tree requires uniform branch probabilities");
  }

  ScenarioTree tree;
  tree.branching = m;
  tree.horizon = horizon;
  tree.w_values = noise.values;
  tree.stage_offset.resize(static_cast<std::size_t>(horizon) + 2);
  tree.stage_prob.resize(static_cast<std::size_t>(horizon) + 1);
  std::int64_t offset = 0;
  std::int64_t stage_nodes = 1;
  double prob = 1.0;
  for (int k = 0; k <= horizon; ++k) {
    tree.stage_offset[static_cast<std::size_t>(k)] = offset;
    tree.stage_prob[static_cast<std::size_t>(k)] = prob;
    offset += stage_nodes;
    if (offset > node_budget)
      throw std::length_error("scenario tree exceeds the node budget; reduce the horizon or the branching factor");
    if (k < horizon) {
      stage_nodes *= m;
      prob /= m;
    }
  }
  tree.stage_offset[static_cast<std::size_t>(horizon) + 1] = offset;
  return tree;
}

inline ScenarioTree build_tree_for(const ScalarModel auto& model, std::int64_t node_budget = 1'000'000) {
  return build_tree(model.horizon(), model.noise(), node_budget);
}

/// Forward simulation over the whole tree: the root carries x0, every child
/// is the parent state propagated under the parent control and the branch
/// disturbance scaled by sigma. Generic over the scalar type so the same
/// code yields values, gradients and Hessian products.
template <class S, ScalarModel Model>
void rollout_tree(const ScenarioTree& tree, const Model& model, double x0,
                  std::span<const S> u_tree, double sigma, std::span<S> x_out) {
  if (static_cast<std::int64_t>(u_tree.size()) != tree.control_count())
    throw std::invalid_argument("control tree size does not match the scenario tree");
  if (static_cast<std::int64_t>(x_out.size()) != tree.state_count())
    throw std::invalid_argument("state buffer size does not match the scenario tree");
  const int m = tree.branching;
  x_out[0] = S(x0);
  for (int k = 0; k < tree.horizon; ++k) {
    const std::int64_t parents = tree.stage_size(k);
    for (std::int64_t i = 1; i <= parents; ++i) {
      const std::int64_t pg = tree.node_index(k, i);
      for (int b = 1; b <= m; ++b) {
        const std::int64_t child = (i - 1) * m + b;
        const std::int64_t cg = tree.node_index(k + 1, child);
        x_out[cg] = model.dynamics(x_out[pg], u_tree[pg], S(sigma * tree.w_values[static_cast<std::size_t>(b - 1)]));
      }
    }
  }
}

template <ScalarModel Model>
std::vector<double> rollout_tree(const ScenarioTree& tree, const Model& model, double x0,
                                 std::span<const double> u_tree, double sigma) {
  std::vector<double> states(static_cast<std::size_t>(tree.state_count()));
  rollout_tree<double>(tree, model, x0, u_tree, sigma, std::span<double>(states));
  return states;
}

}  // namespace cecgap
