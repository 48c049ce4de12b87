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
#include <utility>
#include <vector>

#include "cecgap/model.hpp"
#include "cecgap/numeric.hpp"
#include "cecgap/study.hpp"

using namespace cecgap;

TEST_CASE("log-log fit recovers exact power laws") {
  std::vector<std::pair<double, double>> quartic, quadratic;
  for (double s : {0.01, 0.02, 0.04}) {
    quartic.emplace_back(s, std::pow(s, 4));
    quadratic.emplace_back(s, 3.0 * s * s);
  }
  const SlopeFit f4 = fit_loglog_slope(quartic, 0.005, 0.05);
  CHECK(f4.slope == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f4.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f4.n_points == 3);

  const SlopeFit f2 = fit_loglog_slope(quadratic, 0.005, 0.05);
  CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f2.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("log-log fit of a perturbed power law stays near the order") {
  std::vector<std::pair<double, double>> pairs;
  for (double s : logspace(0.01, 0.05, 9)) pairs.emplace_back(s, std::pow(s, 4) * (1.0 + s));
  const SlopeFit fit = fit_loglog_slope(pairs, 0.01, 0.05);
  CHECK(fit.slope > 4.0);
  CHECK(fit.slope < 4.1);
}

TEST_CASE("log-log fit rejects degenerate inputs") {
  std::vector<std::pair<double, double>> two = {{0.01, 1e-8}, {0.02, 1.6e-7}};
  CHECK_THROWS_AS((void)fit_loglog_slope(two, 0.005, 0.05), std::invalid_argument);

  std::vector<std::pair<double, double>> floor = {{0.01, -1e-12}, {0.02, 0.0}, {0.04, -3e-13}};
  CHECK_THROWS_AS((void)fit_loglog_slope(floor, 0.005, 0.05), std::domain_error);

  // window filtering applies before the count check
  std::vector<std::pair<double, double>> outside = {{0.2, 1.0}, {0.3, 1.0}, {0.4, 1.0}, {0.5, 1.0}};
  CHECK_THROWS_AS((void)fit_loglog_slope(outside, 0.005, 0.05), std::invalid_argument);
}

TEST_CASE("scaling study on the LQ model sits at the certainty-equivalence floor") {
  const BenchmarkModel bench;
  const LqModel lq = make_lq_model(bench.lin_a(), bench.lin_b(), 5.0, 1.0, 10);
  const std::vector<double> xs = {0.0, 1.0};
  const std::vector<double> sigmas = {0.05, 0.2};
  std::vector<StudyFailure> failures;
  const auto records = run_scaling_study(lq, xs, sigmas, {}, 2, &failures);
  CHECK(failures.empty());
  CHECK(records.size() == 4);
  for (const auto& rec : records) {
    CHECK(rec.delta_v <= 1e-8 * (1.0 + std::abs(rec.v_star)));
    CHECK(rec.delta_v >= -1e-9 * (1.0 + std::abs(rec.v_star)));
    CHECK(rec.control_gap <= 1e-8);
  }
}

TEST_CASE("scaling study rejects nonpositive sigma") {
  const BenchmarkModel bench;
  const std::vector<double> xs = {0.5};
  const std::vector<double> bad = {0.05, 0.0};
  CHECK_THROWS_AS((void)run_scaling_study(bench, xs, bad), std::invalid_argument);
  const std::vector<double> neg = {-0.05};
  CHECK_THROWS_AS((void)run_scaling_study(bench, xs, neg), std::invalid_argument);
}

TEST_CASE("benchmark suboptimality quadruples its order against the control gap") {
  const BenchmarkModel bench;
  const std::vector<double> xs = {1.0};
  const std::vector<double> sigmas = {0.01, 0.02};
  const auto records = run_scaling_study(bench, xs, sigmas);
  REQUIRE(records.size() == 2);
  const double dv_ratio = records[1].delta_v / records[0].delta_v;
  const double gap_ratio = records[1].control_gap / records[0].control_gap;
  CHECK(dv_ratio > 16.0 * 0.7);
  CHECK(dv_ratio < 16.0 * 1.3);
  CHECK(gap_ratio > 4.0 * 0.8);
  CHECK(gap_ratio < 4.0 * 1.2);
}

TEST_CASE("suboptimality nearly coincides across the two reference states") {
  const BenchmarkModel bench;
  const std::vector<double> xs = {0.5, 1.0};
  const std::vector<double> sigmas = {0.02, 0.05};
  const auto records = run_scaling_study(bench, xs, sigmas, {}, 2);
  REQUIRE(records.size() == 4);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double ratio = records[i].delta_v / records[i + sigmas.size()].delta_v;
    CHECK(ratio > 1.0 / 3.0);
    CHECK(ratio < 3.0);
  }
}

TEST_CASE("policy sensitivity vanishes on the LQ model") {
  const BenchmarkModel bench;
  const LqModel lq = make_lq_model(bench.lin_a(), bench.lin_b(), 5.0, 1.0, 10);
  const ScenarioTree tree = build_tree_for(lq);
  const std::vector<double> sigmas = {0.1, 0.05, 0.02};
  const auto diffs = policy_sensitivity_check(lq, tree, 1.0, sigmas);
  for (const auto& [sigma, diff] : diffs) CHECK(std::abs(diff) <= 1e-8);
}

TEST_CASE("policy sensitivity vanishes for the symmetric benchmark noise") {
  const BenchmarkModel bench;
  const ScenarioTree tree = build_tree_for(bench);
  SolverOptions tight;
  tight.grad_tol = 1e-12;
  const std::vector<double> sigmas = {0.05, 0.02};
  const auto diffs = policy_sensitivity_check(bench, tree, 1.0, sigmas, tight);
  for (const auto& [sigma, diff] : diffs) CHECK(std::abs(diff) <= 1e-8);
}

TEST_CASE("policy sensitivity preconditions") {
  const BenchmarkModel bench;
  const ScenarioTree tree = build_tree_for(bench);
  const std::vector<double> zero = {0.0};
  CHECK_THROWS_AS((void)policy_sensitivity_check(bench, tree, 1.0, zero), std::invalid_argument);
  const std::vector<double> increasing = {0.02, 0.05};
  CHECK_THROWS_AS((void)policy_sensitivity_check(bench, tree, 1.0, increasing), std::invalid_argument);
}

TEST_CASE("pure power laws never trigger the breakdown flag") {
  std::vector<std::pair<double, double>> pairs;
  for (double s : logspace(0.01, 0.3, 12)) pairs.emplace_back(s, 2.5 * std::pow(s, 4));
  const auto slopes = local_loglog_slopes(pairs);
  CHECK(slopes.size() == 11);
  CHECK(!first_slope_breakdown(slopes, 3.5).has_value());
}

TEST_CASE("a kinked synthetic law is flagged at the kink") {
  std::vector<std::pair<double, double>> pairs;
  for (double s : logspace(0.01, 0.3, 12)) {
    const double y = s < 0.1 ? std::pow(s, 4) : std::pow(0.1, 4) * std::pow(s / 0.1, 1.5);
    pairs.emplace_back(s, y);
  }
  const auto slopes = local_loglog_slopes(pairs);
  const auto flag = first_slope_breakdown(slopes, 3.5);
  REQUIRE(flag.has_value());
  CHECK(*flag > 0.05);
  CHECK(*flag < 0.2);
}

TEST_CASE("breakdown scan validates its sigma grid") {
  const BenchmarkModel bench;
  const std::vector<double> few = {0.01, 0.02, 0.04, 0.08};
  CHECK_THROWS_AS((void)breakdown_scan(bench, 1.0, few), std::invalid_argument);
  const std::vector<double> unsorted = {0.01, 0.02, 0.04, 0.03, 0.08, 0.1, 0.2, 0.3};
  CHECK_THROWS_AS((void)breakdown_scan(bench, 1.0, unsorted), std::invalid_argument);
}

TEST_CASE("study records are independent of the worker count") {
  const BenchmarkModel bench;
  const std::vector<double> xs = {0.5};
  const std::vector<double> sigmas = {0.03, 0.06};
  const auto serial = run_scaling_study(bench, xs, sigmas, {}, 1);
  const auto parallel = run_scaling_study(bench, xs, sigmas, {}, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].v_star == parallel[i].v_star);
    CHECK(serial[i].v_cec == parallel[i].v_cec);
    CHECK(serial[i].u_star_root == parallel[i].u_star_root);
    CHECK(serial[i].u_cec_root == parallel[i].u_cec_root);
  }
}
