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
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cecgap/autodiff.hpp"
#include "cecgap/model.hpp"
#include "cecgap/numeric.hpp"
#include "cecgap/tree.hpp"

namespace cecgap {

struct SolverOptions {
  double grad_tol = 1e-10;      // convergence threshold on the gradient max norm
  int max_iters = 200;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double cg_tol_factor = 0.5;   // CG residual target = cg_tol_factor * grad_tol
  double lm_floor = 1e-10;      // smallest Levenberg shift once damping engages
  int cg_max_iters = 400;
  int max_halvings = 60;
};

inline void validate_options(const SolverOptions& o) {
  if (o.grad_tol <= 0.0) throw std::invalid_argument("grad_tol must be positive");
  if (o.armijo_c1 <= 0.0 || o.armijo_c1 >= 1.0) throw std::invalid_argument("armijo_c1 must lie in (0,1)");
  if (o.backtrack <= 0.0 || o.backtrack >= 1.0) throw std::invalid_argument("backtracking factor must lie in (0,1)");
  if (o.max_iters < 1 || o.cg_max_iters < 1) throw std::invalid_argument("iteration limits must be positive");
}

struct IterationRecord {
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
  int cg_iters = 0;
  double damping = 0.0;
};

struct NewtonResult {
  std::vector<double> u;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<IterationRecord> history;
};

/// Anything the Newton-CG driver can minimize: a smooth function of a flat
/// control vector exposing value, gradient and Hessian-vector products.
template <class F>
concept NewtonObjective = requires(const F f, std::span<const double> u,
                                   std::span<const double> v, std::span<double> out) {
  { f.dim() } -> std::convertible_to<std::size_t>;
  { f.value(u) } -> std::convertible_to<double>;
  { f.gradient(u, out) } -> std::convertible_to<double>;
  { f.hess_vec(u, v, out) };
};

template <class F>
concept HasPrecondDiag = requires(const F f, std::span<double> d) {
  { f.precond_diag(d) };
};

namespace detail {

inline double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct CgOutcome {
  int iters = 0;
  bool negative_curvature = false;
  double curvature = 0.0;
};

// Preconditioned CG on (H + lambda * diag(precond)) d = -g. Solves close to
// machine precision so that Newton retains its one-step exactness on
// quadratics; the outer loop restarts with a larger Levenberg shift whenever
// negative curvature shows up along a search direction.
template <NewtonObjective F>
CgOutcome cg_solve(const F& obj, std::span<const double> u, std::span<const double> g,
                   std::span<const double> precond, double lambda,
                   const SolverOptions& opts, std::span<double> d) {
  const std::size_t n = g.size();
  std::vector<double> r(n), z(n), p(n), hp(n);
  std::fill(d.begin(), d.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];

  const double target = std::max(opts.cg_tol_factor * opts.grad_tol, 1e-15 * max_norm(g));
  CgOutcome out;
  if (max_norm(r) <= target) return out;

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / precond[i];
  double rz = dot(r, z);
  p = z;

  const int max_iters = std::min<int>(opts.cg_max_iters, static_cast<int>(2 * n));
  for (int it = 0; it < max_iters; ++it) {
    obj.hess_vec(u, p, hp);
    if (lambda > 0.0) {
      for (std::size_t i = 0; i < n; ++i) hp[i] += lambda * precond[i] * p[i];
    }
    const double php = dot(p, hp);
    double pmp = 0.0;
    for (std::size_t i = 0; i < n; ++i) pmp += precond[i] * p[i] * p[i];
    if (php <= 1e-14 * pmp) {
      out.negative_curvature = true;
      out.curvature = (pmp > 0.0) ? php / pmp : 0.0;
      return out;
    }
    const double alpha = rz / php;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] += alpha * p[i];
      r[i] -= alpha * hp[i];
    }
    ++out.iters;
    if (max_norm(r) <= target) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / precond[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return out;
}

}  // namespace detail

/// Matrix-free Newton-CG with Armijo backtracking. The Hessian is touched
/// only through Hessian-vector products inside the CG inner loop; Levenberg
/// damping is added (and escalated) when CG detects negative curvature.
/// Objectives may expose precond_diag() as a diagonal scaling hint.
template <NewtonObjective F>
NewtonResult newton_minimize(const F& obj, std::vector<double> u, const SolverOptions& opts = {}) {
  validate_options(opts);
  const std::size_t n = obj.dim();
  if (u.size() != n) throw std::invalid_argument("initial guess size does not match the objective dimension");

  NewtonResult result;
  if (n == 0) {
    result.u = std::move(u);
    result.value = obj.value(result.u);
    result.converged = true;
    return result;
  }

  std::vector<double> precond(n, 1.0);
  if constexpr (HasPrecondDiag<F>) obj.precond_diag(std::span<double>(precond));
  for (double& m : precond) m = std::max(m, 1e-300);

  std::vector<double> g(n), d(n), trial(n);
  double value = obj.gradient(u, g);
  if (!std::isfinite(value)) throw std::invalid_argument("objective is not finite at the initial guess");

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double gnorm = detail::max_norm(g);
    if (gnorm <= opts.grad_tol) {
      result.converged = true;
      break;
    }

    double lambda = 0.0;
    detail::CgOutcome cg;
    for (int attempt = 0; attempt < 60; ++attempt) {
      cg = detail::cg_solve(obj, u, g, precond, lambda, opts, d);
      if (!cg.negative_curvature) break;
      const double bump = 2.0 * std::abs(cg.curvature);
      lambda = std::max({opts.lm_floor, 4.0 * lambda, bump});
    }

    double gd = detail::dot(g, d);
    if (!(gd < 0.0)) {
      // CG produced no usable direction; fall back to preconditioned steepest descent.
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] / precond[i];
      gd = detail::dot(g, d);
    }

    double step = 1.0;
    bool accepted = false;
    double trial_value = value;
    // Near the optimum the Newton decrease drops below value resolution;
    // the rounding allowance keeps the full step acceptable there.
    const double rounding = 32.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * d[i];
      trial_value = obj.value(trial);
      if (std::isfinite(trial_value) && trial_value <= value + opts.armijo_c1 * step * gd + rounding) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    u.swap(trial);
    value = obj.gradient(u, g);
    ++result.iters;
    result.history.push_back({result.iters, value, detail::max_norm(g), step, cg.iters, lambda});
  }

  if (!result.converged) result.converged = detail::max_norm(g) <= opts.grad_tol;
  result.u = std::move(u);
  result.value = value;
  result.grad_norm = detail::max_norm(g);
  return result;
}

/// Adapts a generic AD-evaluable functor (callable on std::vector<S>) to the
/// NewtonObjective interface via forward passes. Intended for small problems
/// and tests; the shooting objectives below provide adjoint sweeps instead.
template <class F>
class AdObjective {
 public:
  AdObjective(F f, std::size_t n) : f_(std::move(f)), n_(n) {}

  std::size_t dim() const { return n_; }

  double value(std::span<const double> u) const {
    std::vector<double> x(u.begin(), u.end());
    return f_(x);
  }

  double gradient(std::span<const double> u, std::span<double> g) const {
    std::vector<Dual1<double>> x(u.begin(), u.end());
    for (std::size_t i = 0; i < n_; ++i) {
      x[i].deriv = 1.0;
      const auto r = f_(x);
      g[i] = r.deriv;
      x[i].deriv = 0.0;
    }
    return value(u);
  }

  void hess_vec(std::span<const double> u, std::span<const double> v, std::span<double> hv) const {
    using D2 = Dual1<Dual1<double>>;
    std::vector<D2> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j].value = Dual1<double>{u[j], v[j]};
    for (std::size_t i = 0; i < n_; ++i) {
      x[i].deriv.value = 1.0;
      hv[i] = f_(x).deriv.deriv;
      x[i].deriv.value = 0.0;
    }
  }

 private:
  F f_;
  std::size_t n_;
};

template <class F>
AdObjective<std::decay_t<F>> make_ad_objective(F&& f, std::size_t n) {
  return AdObjective<std::decay_t<F>>(std::forward<F>(f), n);
}

// ---------------------------------------------------------------------------
// Single-shooting objectives
// ---------------------------------------------------------------------------

namespace detail {

// Partial derivatives of the model functions along one argument, evaluated
// in Dual1<S> so the adjoint sweep itself stays differentiable.
template <class S, ScalarModel Model>
S dyn_dx(const Model& m, const S& x, const S& u, const S& w) {
  return m.dynamics(Dual1<S>{x, S(1.0)}, Dual1<S>{u, S(0.0)}, Dual1<S>{w, S(0.0)}).deriv;
}
template <class S, ScalarModel Model>
S dyn_du(const Model& m, const S& x, const S& u, const S& w) {
  return m.dynamics(Dual1<S>{x, S(0.0)}, Dual1<S>{u, S(1.0)}, Dual1<S>{w, S(0.0)}).deriv;
}
template <class S, ScalarModel Model>
S stage_dx(const Model& m, const S& x, const S& u) {
  return m.stage_cost(Dual1<S>{x, S(1.0)}, Dual1<S>{u, S(0.0)}).deriv;
}
template <class S, ScalarModel Model>
S stage_du(const Model& m, const S& x, const S& u) {
  return m.stage_cost(Dual1<S>{x, S(0.0)}, Dual1<S>{u, S(1.0)}).deriv;
}
template <class S, ScalarModel Model>
S terminal_dx(const Model& m, const S& x) {
  return m.terminal_cost(Dual1<S>{x, S(1.0)}).deriv;
}

}  // namespace detail

/// Deterministic total cost of a control trajectory from x0 over a reduced
/// horizon, with all states eliminated by forward simulation. Gradients come
/// from an adjoint sweep; Hessian products from re-running that sweep in
/// Dual1 arithmetic with the controls seeded along the requested direction.
template <ScalarModel Model>
class NominalObjective {
 public:
  NominalObjective(const Model& model, double x0, int steps)
      : model_(&model), x0_(x0), steps_(steps) {
    if (steps < 0) throw std::invalid_argument("horizon must be nonnegative");
  }

  std::size_t dim() const { return static_cast<std::size_t>(steps_); }

  template <class S>
  S eval(std::span<const S> u) const {
    Accum<S> acc;
    S x(x0_);
    for (int k = 0; k < steps_; ++k) {
      acc.add(model_->stage_cost(x, u[static_cast<std::size_t>(k)]));
      x = model_->dynamics(x, u[static_cast<std::size_t>(k)], S(0.0));
    }
    acc.add(model_->terminal_cost(x));
    return acc.total();
  }

  template <class S>
  S eval_adjoint(std::span<const S> u, std::span<S> grad) const {
    const auto n = static_cast<std::size_t>(steps_);
    std::vector<S> x(n + 1);
    Accum<S> acc;
    x[0] = S(x0_);
    for (std::size_t k = 0; k < n; ++k) {
      acc.add(model_->stage_cost(x[k], u[k]));
      x[k + 1] = model_->dynamics(x[k], u[k], S(0.0));
    }
    acc.add(model_->terminal_cost(x[n]));

    S lam = detail::terminal_dx(*model_, x[n]);
    for (std::size_t k = n; k-- > 0;) {
      const S w(0.0);
      grad[k] = detail::stage_du(*model_, x[k], u[k]) + detail::dyn_du(*model_, x[k], u[k], w) * lam;
      lam = detail::stage_dx(*model_, x[k], u[k]) + detail::dyn_dx(*model_, x[k], u[k], w) * lam;
    }
    return acc.total();
  }

  double value(std::span<const double> u) const { return eval<double>(u); }

  double gradient(std::span<const double> u, std::span<double> g) const {
    return eval_adjoint<double>(u, g);
  }

  void hess_vec(std::span<const double> u, std::span<const double> v, std::span<double> hv) const {
    std::vector<Dual1<double>> ud(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ud[i] = {u[i], v[i]};
    std::vector<Dual1<double>> gd(u.size());
    eval_adjoint<Dual1<double>>(ud, gd);
    for (std::size_t i = 0; i < u.size(); ++i) hv[i] = gd[i].deriv;
  }

 private:
  const Model* model_;
  double x0_;
  int steps_;
};

/// Expected total cost over the scenario tree: stage costs weighted by the
/// stage probability, terminal costs at the leaves. A control per node
/// encodes the policy. For a singleton disturbance set this reduces to the
/// nominal objective.
template <ScalarModel Model>
class TreeObjective {
 public:
  TreeObjective(const Model& model, const ScenarioTree& tree, double x0, double sigma)
      : model_(&model), tree_(&tree), x0_(x0), sigma_(sigma) {}

  std::size_t dim() const { return static_cast<std::size_t>(tree_->control_count()); }

  template <class S>
  S eval(std::span<const S> u) const {
    std::vector<S> x(static_cast<std::size_t>(tree_->state_count()));
    rollout_tree<S>(*tree_, *model_, x0_, u, sigma_, x);
    Accum<S> acc;
    for (int k = 0; k < tree_->horizon; ++k) {
      const double pk = tree_->stage_prob[static_cast<std::size_t>(k)];
      for (std::int64_t i = 1; i <= tree_->stage_size(k); ++i) {
        const auto g = static_cast<std::size_t>(tree_->node_index(k, i));
        acc.add(pk * model_->stage_cost(x[g], u[g]));
      }
    }
    const double pn = tree_->stage_prob[static_cast<std::size_t>(tree_->horizon)];
    for (std::int64_t i = 1; i <= tree_->stage_size(tree_->horizon); ++i) {
      const auto g = static_cast<std::size_t>(tree_->node_index(tree_->horizon, i));
      acc.add(pn * model_->terminal_cost(x[g]));
    }
    return acc.total();
  }

  // Adjoint sweep over the tree: one backward pass instead of one forward
  // pass per control coordinate, so the gradient costs O(tree size).
  template <class S>
  S eval_adjoint(std::span<const S> u, std::span<S> grad) const {
    const int m = tree_->branching;
    const int N = tree_->horizon;
    std::vector<S> x(static_cast<std::size_t>(tree_->state_count()));
    rollout_tree<S>(*tree_, *model_, x0_, u, sigma_, x);

    Accum<S> acc;
    for (int k = 0; k < N; ++k) {
      const double pk = tree_->stage_prob[static_cast<std::size_t>(k)];
      for (std::int64_t i = 1; i <= tree_->stage_size(k); ++i) {
        const auto g = static_cast<std::size_t>(tree_->node_index(k, i));
        acc.add(pk * model_->stage_cost(x[g], u[g]));
      }
    }
    const double pn = tree_->stage_prob[static_cast<std::size_t>(N)];
    for (std::int64_t i = 1; i <= tree_->stage_size(N); ++i) {
      const auto g = static_cast<std::size_t>(tree_->node_index(N, i));
      acc.add(pn * model_->terminal_cost(x[g]));
    }

    std::vector<S> lam(static_cast<std::size_t>(tree_->state_count()));
    for (std::int64_t i = 1; i <= tree_->stage_size(N); ++i) {
      const auto g = static_cast<std::size_t>(tree_->node_index(N, i));
      lam[g] = pn * detail::terminal_dx(*model_, x[g]);
    }
    for (int k = N; k-- > 0;) {
      const double pk = tree_->stage_prob[static_cast<std::size_t>(k)];
      for (std::int64_t i = 1; i <= tree_->stage_size(k); ++i) {
        const auto g = static_cast<std::size_t>(tree_->node_index(k, i));
        S gu = pk * detail::stage_du(*model_, x[g], u[g]);
        S lx = pk * detail::stage_dx(*model_, x[g], u[g]);
        for (int b = 1; b <= m; ++b) {
          const std::int64_t child = (i - 1) * m + b;
          const auto cg = static_cast<std::size_t>(tree_->node_index(k + 1, child));
          const S w(sigma_ * tree_->w_values[static_cast<std::size_t>(b - 1)]);
          gu += detail::dyn_du(*model_, x[g], u[g], w) * lam[cg];
          lx += detail::dyn_dx(*model_, x[g], u[g], w) * lam[cg];
        }
        grad[g] = gu;
        lam[g] = lx;
      }
    }
    return acc.total();
  }

  double value(std::span<const double> u) const { return eval<double>(u); }

  double gradient(std::span<const double> u, std::span<double> g) const {
    return eval_adjoint<double>(u, g);
  }

  void hess_vec(std::span<const double> u, std::span<const double> v, std::span<double> hv) const {
    std::vector<Dual1<double>> ud(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ud[i] = {u[i], v[i]};
    std::vector<Dual1<double>> gd(u.size());
    eval_adjoint<Dual1<double>>(ud, gd);
    for (std::size_t i = 0; i < u.size(); ++i) hv[i] = gd[i].deriv;
  }

  // Stage-probability scaling: the dominant source of Hessian ill
  // conditioning across tree stages, handed to CG as a diagonal hint.
  void precond_diag(std::span<double> d) const {
    for (int k = 0; k < tree_->horizon; ++k) {
      const double pk = tree_->stage_prob[static_cast<std::size_t>(k)];
      for (std::int64_t i = 1; i <= tree_->stage_size(k); ++i) {
        d[static_cast<std::size_t>(tree_->node_index(k, i))] = pk;
      }
    }
  }

 private:
  const Model* model_;
  const ScenarioTree* tree_;
  double x0_;
  double sigma_;
};

// ---------------------------------------------------------------------------
// OCP front ends
// ---------------------------------------------------------------------------

struct NominalSolution {
  std::vector<double> u_traj;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

struct TreeSolution {
  std::vector<double> u_tree;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
  double root_control = 0.0;
  std::vector<IterationRecord> history;
};

/// Solves the deterministic OCP from x0 over `steps` stages. Starts from
/// u = 0 (or the supplied warm start). When the uncontrolled rollout is not
/// even finite -- the drift of the benchmark blows up in finite time -- the
/// guess is grown by horizon continuation: solve 1 step, append, re-solve.
template <ScalarModel Model>
NominalSolution solve_nominal(const Model& model, double x0, int steps,
                              const SolverOptions& opts = {}, std::span<const double> warm = {}) {
  if (steps < 0) throw std::invalid_argument("horizon must be nonnegative");
  NominalSolution sol;
  if (steps == 0) {
    sol.value = model.template terminal_cost<double>(x0);
    sol.converged = true;
    return sol;
  }

  std::vector<double> guess;
  if (!warm.empty()) {
    if (warm.size() != static_cast<std::size_t>(steps))
      throw std::invalid_argument("warm start size does not match the horizon");
    guess.assign(warm.begin(), warm.end());
  } else {
    guess.assign(static_cast<std::size_t>(steps), 0.0);
  }

  int continuation_iters = 0;
  NominalObjective<Model> full(model, x0, steps);
  const double guess_value = full.value(guess);
  if (!(guess_value < 1e20)) {  // non-finite or runaway rollout
    guess.clear();
    for (int j = 1; j <= steps; ++j) {
      guess.push_back(guess.empty() ? 0.0 : guess.back());
      NominalObjective<Model> obj(model, x0, j);
      NewtonResult stage = newton_minimize(obj, guess, opts);
      continuation_iters += stage.iters;
      guess = std::move(stage.u);
    }
  }

  NewtonResult res = newton_minimize(full, std::move(guess), opts);
  sol.u_traj = std::move(res.u);
  sol.value = res.value;
  sol.grad_norm = res.grad_norm;
  sol.iters = res.iters + continuation_iters;
  sol.converged = res.converged;
  sol.history = std::move(res.history);
  return sol;
}

namespace detail {

// Control tree obtained by running the shrinking-horizon MPC policy down
// every branch, at a loose tolerance. Used only as an initial guess.
template <ScalarModel Model>
void mpc_guess_walk(const Model& model, const ScenarioTree& tree, double sigma, int stage,
                    std::int64_t node, double x, std::span<const double> warm,
                    const SolverOptions& opts, std::vector<double>& guess) {
  if (stage == tree.horizon) return;
  const NominalSolution sol = solve_nominal(model, x, tree.horizon - stage, opts, warm);
  const double u = sol.u_traj[0];
  guess[static_cast<std::size_t>(tree.node_index(stage, node))] = u;
  const std::span<const double> shifted(sol.u_traj.data() + 1, sol.u_traj.size() - 1);
  for (int b = 1; b <= tree.branching; ++b) {
    const double w = sigma * tree.w_values[static_cast<std::size_t>(b - 1)];
    const double child_x = model.template dynamics<double>(x, u, w);
    mpc_guess_walk(model, tree, sigma, stage + 1, (node - 1) * tree.branching + b, child_x, shifted, opts, guess);
  }
}

}  // namespace detail

/// Solves the stochastic OCP over the scenario tree. The initial guess is
/// the nominal solution broadcast over the tree, which is already optimal
/// at sigma = 0. When that open-loop rollout is not even finite (large
/// sigma lets the drift run away on the worst noise path), the guess is
/// rebuilt by walking the tree with the shrinking-horizon MPC policy.
template <ScalarModel Model>
TreeSolution solve_tree(const Model& model, const ScenarioTree& tree, double x0, double sigma,
                        const SolverOptions& opts = {}) {
  const NominalSolution nominal = solve_nominal(model, x0, tree.horizon, opts);

  std::vector<double> guess(static_cast<std::size_t>(tree.control_count()));
  for (int k = 0; k < tree.horizon; ++k) {
    for (std::int64_t i = 1; i <= tree.stage_size(k); ++i) {
      guess[static_cast<std::size_t>(tree.node_index(k, i))] = nominal.u_traj[static_cast<std::size_t>(k)];
    }
  }

  TreeObjective<Model> obj(model, tree, x0, sigma);
  if (!(obj.value(guess) < 1e20)) {
    SolverOptions loose = opts;
    loose.grad_tol = std::max(opts.grad_tol, 1e-6);
    guess[0] = nominal.u_traj[0];
    const std::span<const double> shifted(nominal.u_traj.data() + 1, nominal.u_traj.size() - 1);
    for (int b = 1; b <= tree.branching; ++b) {
      const double w = sigma * tree.w_values[static_cast<std::size_t>(b - 1)];
      const double child_x = model.template dynamics<double>(x0, nominal.u_traj[0], w);
      detail::mpc_guess_walk(model, tree, sigma, 1, b, child_x, shifted, loose, guess);
    }
  }

  NewtonResult res = newton_minimize(obj, std::move(guess), opts);
  TreeSolution sol;
  sol.u_tree = std::move(res.u);
  sol.value = res.value;
  sol.grad_norm = res.grad_norm;
  sol.iters = res.iters;
  sol.converged = nominal.converged && res.converged;
  sol.root_control = sol.u_tree.empty() ? 0.0 : sol.u_tree[0];
  sol.history = std::move(res.history);
  return sol;
}

}  // namespace cecgap
