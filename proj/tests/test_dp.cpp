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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cecgap/dp.hpp"
#include "cecgap/model.hpp"
#include "cecgap/solver.hpp"

using namespace cecgap;

namespace {

std::vector<double> sample(const Grid1D& g, double (*f)(double)) {
  std::vector<double> v(static_cast<std::size_t>(g.points));
  for (int j = 0; j < g.points; ++j) v[static_cast<std::size_t>(j)] = f(g.point(j));
  return v;
}

}  // namespace

TEST_CASE("interpolation is exact on the grid points") {
  const Grid1D g{-2.0, 2.0, 41};
  const auto table = sample(g, [](double x) { return std::sin(3.0 * x) + x; });
  for (int j = 0; j < g.points; ++j) {
    CHECK(interpolate<double>(table, g, g.point(j)) == table[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("interpolation reproduces linear tables everywhere inside") {
  const Grid1D g{-1.0, 3.0, 17};
  const auto table = sample(g, [](double x) { return 2.0 * x; });
  for (int i = 0; i <= 200; ++i) {
    const double x = -1.0 + 4.0 * i / 200.0;
    CHECK(interpolate<double>(table, g, x) == doctest::Approx(2.0 * x).epsilon(1e-14));
  }
}

TEST_CASE("interpolation reproduces cubics on interior cells") {
  const Grid1D g{-2.0, 2.0, 9};  // h = 0.5
  const auto table = sample(g, [](double x) { return x * x * x; });
  // cell [0, 0.5] sits well inside the fourth-order stencil range
  for (int i = 0; i <= 20; ++i) {
    const double x = 0.0 + 0.5 * i / 20.0;
    CHECK(interpolate<double>(table, g, x) == doctest::Approx(x * x * x).epsilon(1e-14));
  }
}

TEST_CASE("interpolation is C1 across cell boundaries") {
  const Grid1D g{-2.0, 2.0, 21};
  const auto table = sample(g, [](double x) { return std::exp(0.5 * x); });
  for (int j = 1; j < g.points - 1; ++j) {
    const double x = g.point(j);
    const double left = interpolate<Dual2>(table, g, Dual2{std::nextafter(x, -10.0), 1.0, 0.0}).d1;
    const double right = interpolate<Dual2>(table, g, Dual2{std::nextafter(x, 10.0), 1.0, 0.0}).d1;
    CHECK(left == doctest::Approx(right).epsilon(1e-9));
  }
}

TEST_CASE("queries outside the grid clamp to the edge and are logged") {
  const Grid1D g{0.0, 1.0, 11};
  const auto table = sample(g, [](double x) { return x * x; });
  ClampStats stats;
  CHECK(interpolate<double>(table, g, -0.5, &stats) == table.front());
  CHECK(interpolate<double>(table, g, 1.7, &stats) == table.back());
  CHECK(stats.count == 2);
  CHECK(stats.max_excess == doctest::Approx(0.7).epsilon(1e-14));
  // clamped duals carry zero derivative (constant extension)
  const Dual2 out = interpolate<Dual2>(table, g, Dual2{1.7, 1.0, 0.0}, &stats);
  CHECK(out.d1 == 0.0);
}

TEST_CASE("backup with zero cost-to-go and decoupled quadratic cost") {
  const LqModel lq = make_lq_model(0.7, 0.3, 5.0, 1.0, 4);
  const Grid1D g{-2.0, 2.0, 101};
  const std::vector<double> zeros(static_cast<std::size_t>(g.points), 0.0);
  std::vector<double> v(zeros.size()), pi(zeros.size());
  std::vector<DpFailure> failures;
  ClampStats clamps;
  // v_next == 0 makes the control purely penalized: pi = 0, V = q x^2
  dp_backup(lq, zeros, g, 0.0, v, pi, 0, {}, failures, clamps);
  CHECK(failures.empty());
  for (int j = 0; j < g.points; ++j) {
    const double x = g.point(j);
    CHECK(std::abs(pi[static_cast<std::size_t>(j)]) <= 1e-11);
    CHECK(v[static_cast<std::size_t>(j)] == doctest::Approx(5.0 * x * x).epsilon(1e-10));
  }
}

TEST_CASE("backup of the Riccati fixed point reproduces itself") {
  const BenchmarkModel bench;
  const LqModel lq = make_lq_model(bench.lin_a(), bench.lin_b(), 5.0, 1.0, 10);
  const Grid1D g{-2.0, 2.0, 401};
  const double qt = lq.terminal_weight();
  std::vector<double> v_next(static_cast<std::size_t>(g.points));
  for (int j = 0; j < g.points; ++j) {
    const double x = g.point(j);
    v_next[static_cast<std::size_t>(j)] = qt * x * x;
  }
  std::vector<double> v(v_next.size()), pi(v_next.size());
  std::vector<DpFailure> failures;
  ClampStats clamps;
  dp_backup(lq, v_next, g, 0.0, v, pi, 0, {}, failures, clamps);
  CHECK(failures.empty());
  for (int j = 0; j < g.points; ++j) {
    const double x = g.point(j);
    CHECK(std::abs(v[static_cast<std::size_t>(j)] - qt * x * x) <= 1e-9 * (1.0 + qt * x * x));
  }
}

TEST_CASE("policy backup with the optimal policy is bit-identical to the backup") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 201};
  std::vector<double> v_next(static_cast<std::size_t>(g.points));
  for (int j = 0; j < g.points; ++j) v_next[static_cast<std::size_t>(j)] = bench.terminal_cost<double>(g.point(j));

  std::vector<double> v(v_next.size()), pi(v_next.size()), v_pol(v_next.size());
  std::vector<DpFailure> failures;
  ClampStats clamps;
  dp_backup(bench, v_next, g, 0.1, v, pi, 0, {}, failures, clamps);
  dp_policy_backup(bench, v_next, pi, g, 0.1, v_pol, {}, clamps);
  for (std::size_t j = 0; j < v.size(); ++j) CHECK(v[j] == v_pol[j]);
}

TEST_CASE("uncontrolled equilibrium of the penalty-free benchmark stays at zero") {
  BenchmarkParams p;
  p.rho = 0.0;
  const BenchmarkModel plain(p);
  const Grid1D g{-2.0, 2.0, 201};  // x = 0 is a grid point
  std::vector<double> v(static_cast<std::size_t>(g.points));
  for (int j = 0; j < g.points; ++j) v[static_cast<std::size_t>(j)] = plain.terminal_cost<double>(g.point(j));
  const std::vector<double> pi_zero(static_cast<std::size_t>(g.points), 0.0);
  ClampStats clamps;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> v_new(v.size());
    dp_policy_backup(plain, v, pi_zero, g, 0.0, v_new, {}, clamps);
    v = std::move(v_new);
    CHECK(v[static_cast<std::size_t>((g.points - 1) / 2)] == 0.0);
  }
}

TEST_CASE("a fixed suboptimal policy upper-bounds the optimal value") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 201};
  const int stages = 4;
  const DpTables nominal = dp_solve(bench, g, 0.0, stages);
  const DpTables optimal = dp_solve(bench, g, 0.3, stages);
  const DpTables fixed = dp_evaluate_cec(bench, g, 0.3, stages, {}, &nominal);
  // compare away from the grid edges, where the clamped extension would
  // contaminate both recursions
  for (int j = 0; j < g.points; ++j) {
    if (std::abs(g.point(j)) > 1.2) continue;
    CHECK(fixed.value[0][static_cast<std::size_t>(j)] >=
          optimal.value[0][static_cast<std::size_t>(j)] - 1e-9);
  }
}

TEST_CASE("zero-stage solve returns the sampled terminal cost") {
  const BenchmarkModel bench;
  const Grid1D g{-1.0, 1.0, 51};
  const DpTables tables = dp_solve(bench, g, 0.0, 0);
  CHECK(tables.stages() == 0);
  for (int j = 0; j < g.points; ++j) {
    CHECK(tables.value[0][static_cast<std::size_t>(j)] == bench.terminal_cost<double>(g.point(j)));
  }
}

TEST_CASE("LQ value shifts by a state-independent constant under noise") {
  const BenchmarkModel bench;
  const LqModel lq = make_lq_model(bench.lin_a(), bench.lin_b(), 5.0, 1.0, 10);
  const Grid1D g{-2.0, 2.0, 801};
  const DpTables quiet = dp_solve(lq, g, 0.0, 6);
  const DpTables noisy = dp_solve(lq, g, 0.2, 6);
  // compare on the interior to keep control-range clamping out of the picture
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < g.points; ++j) {
    const double x = g.point(j);
    if (std::abs(x) > 1.2) continue;
    const double diff = noisy.value[0][static_cast<std::size_t>(j)] - quiet.value[0][static_cast<std::size_t>(j)];
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
  }
  CHECK(hi - lo <= 1e-6);
  CHECK(lo > 0.0);  // noise costs something
}

TEST_CASE("policy evaluation at sigma zero is bit-identical to the solve") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 301};
  const int stages = 5;
  const DpTables solved = dp_solve(bench, g, 0.0, stages);
  const DpTables evaluated = dp_evaluate_cec(bench, g, 0.0, stages, {}, &solved);
  for (int k = 0; k <= stages; ++k) {
    for (int j = 0; j < g.points; ++j) {
      CHECK(solved.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] ==
            evaluated.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
    }
  }
}

TEST_CASE("dp tables are even in sigma") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 201};
  const DpTables plus = dp_solve(bench, g, 0.15, 4);
  const DpTables minus = dp_solve(bench, g, -0.15, 4);
  for (int j = 0; j < g.points; ++j) {
    CHECK(plus.value[0][static_cast<std::size_t>(j)] ==
          doctest::Approx(minus.value[0][static_cast<std::size_t>(j)]).epsilon(1e-12));
  }
}

TEST_CASE("worker count does not change the tables") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 201};
  DpOptions serial, parallel;
  serial.workers = 1;
  parallel.workers = 4;
  const DpTables a = dp_solve(bench, g, 0.1, 3, serial);
  const DpTables b = dp_solve(bench, g, 0.1, 3, parallel);
  for (int k = 0; k <= 3; ++k) {
    for (int j = 0; j < g.points; ++j) {
      CHECK(a.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] ==
            b.value[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
    }
  }
}

TEST_CASE("grid dp agrees with the shooting solver on the benchmark") {
  const BenchmarkModel bench;
  const Grid1D g{-2.0, 2.0, 2001};
  const DpTables tables = dp_solve(bench, g, 0.0, 10);
  CHECK(tables.failures.empty());
  for (int i = 0; i < 20; ++i) {
    const double x = -0.1 + 1.3 * i / 19.0;
    const NominalSolution sol = solve_nominal(bench, x, 10);
    CHECK(sol.converged);
    CHECK(std::abs(tables.value_at(0, x) - sol.value) <= 1e-4);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((void)dp_solve(BenchmarkModel{}, Grid1D{1.0, -1.0, 11}, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)dp_solve(BenchmarkModel{}, Grid1D{-1.0, 1.0, 1}, 0.0, 2), std::invalid_argument);
}
