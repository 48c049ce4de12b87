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

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cecgap/dp.hpp"
#include "cecgap/model.hpp"
#include "cecgap/numeric.hpp"
#include "cecgap/solver.hpp"

namespace cecgap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a CLI run needs, with defaults reproducing the reference
/// benchmark setup. Values come from a flat key = value file with dotted
/// section prefixes (e.g. solver.grad_tol = 1e-10).
struct RunConfig {
  std::string model = "benchmark";  // benchmark | lq
  BenchmarkParams benchmark;

  struct LqConfig {
    double a = 0.0;  // 0 means: use the benchmark linearization
    double b = 0.0;
    double q = 5.0;
    double r = 1.0;
    int horizon = 10;
    bool a_set = false;
    bool b_set = false;
  } lq;

  Grid1D grid;
  double run_x0 = 1.0;
  double run_sigma = 0.2;
  std::vector<double> study_x = {0.0, 0.5, 1.0};
  std::vector<double> study_sigma = logspace(0.01, 0.3, 12);
  double window_lo = 0.01;
  double window_hi = 0.05;
  std::vector<double> dp_sigma = {0.05, 0.2};
  SolverOptions solver;
  bool solver_verbose = false;
  std::int64_t node_budget = 1'000'000;
  int workers = 1;
  bool plot = false;
  std::string out_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as an integer");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a boolean");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list element");
    out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

/// Parses "key = value" lines; '#' starts a comment; unknown keys are
/// rejected so typos fail fast instead of silently running defaults.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string> entries;

  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!entries.emplace(key, value).second)
      throw ConfigError("config key '" + key + "' appears twice");
  }

  for (const auto& [key, value] : entries) {
    if (key == "model") {
      if (value != "benchmark" && value != "lq")
        throw ConfigError("config key 'model' must be 'benchmark' or 'lq'");
      cfg.model = value;
    } else if (key == "benchmark.t_span") cfg.benchmark.t_span = detail::parse_double(key, value);
    else if (key == "benchmark.horizon") cfg.benchmark.horizon = static_cast<int>(detail::parse_int(key, value));
    else if (key == "benchmark.x_lb") cfg.benchmark.x_lb = detail::parse_double(key, value);
    else if (key == "benchmark.q") cfg.benchmark.q = detail::parse_double(key, value);
    else if (key == "benchmark.r") cfg.benchmark.r = detail::parse_double(key, value);
    else if (key == "benchmark.rho") cfg.benchmark.rho = detail::parse_double(key, value);
    else if (key == "benchmark.eps") cfg.benchmark.eps = detail::parse_double(key, value);
    else if (key == "lq.a") { cfg.lq.a = detail::parse_double(key, value); cfg.lq.a_set = true; }
    else if (key == "lq.b") { cfg.lq.b = detail::parse_double(key, value); cfg.lq.b_set = true; }
    else if (key == "lq.q") cfg.lq.q = detail::parse_double(key, value);
    else if (key == "lq.r") cfg.lq.r = detail::parse_double(key, value);
    else if (key == "lq.horizon") cfg.lq.horizon = static_cast<int>(detail::parse_int(key, value));
    else if (key == "grid.lo") cfg.grid.lo = detail::parse_double(key, value);
    else if (key == "grid.hi") cfg.grid.hi = detail::parse_double(key, value);
    else if (key == "grid.points") cfg.grid.points = static_cast<int>(detail::parse_int(key, value));
    else if (key == "run.x0") cfg.run_x0 = detail::parse_double(key, value);
    else if (key == "run.sigma") cfg.run_sigma = detail::parse_double(key, value);
    else if (key == "study.x") cfg.study_x = detail::parse_list(key, value);
    else if (key == "study.sigma") cfg.study_sigma = detail::parse_list(key, value);
    else if (key == "study.window_lo") cfg.window_lo = detail::parse_double(key, value);
    else if (key == "study.window_hi") cfg.window_hi = detail::parse_double(key, value);
    else if (key == "dp.sigma") cfg.dp_sigma = detail::parse_list(key, value);
    else if (key == "solver.grad_tol") cfg.solver.grad_tol = detail::parse_double(key, value);
    else if (key == "solver.max_iters") cfg.solver.max_iters = static_cast<int>(detail::parse_int(key, value));
    else if (key == "solver.armijo_c1") cfg.solver.armijo_c1 = detail::parse_double(key, value);
    else if (key == "solver.backtrack") cfg.solver.backtrack = detail::parse_double(key, value);
    else if (key == "solver.cg_tol_factor") cfg.solver.cg_tol_factor = detail::parse_double(key, value);
    else if (key == "solver.lm_floor") cfg.solver.lm_floor = detail::parse_double(key, value);
    else if (key == "solver.cg_max_iters") cfg.solver.cg_max_iters = static_cast<int>(detail::parse_int(key, value));
    else if (key == "solver.verbose") cfg.solver_verbose = detail::parse_bool(key, value);
    else if (key == "tree.node_budget") cfg.node_budget = detail::parse_int(key, value);
    else if (key == "workers") cfg.workers = static_cast<int>(detail::parse_int(key, value));
    else if (key == "plot") cfg.plot = detail::parse_bool(key, value);
    else if (key == "out") cfg.out_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Checks every numeric override against the module preconditions before any
/// computation starts.
inline void validate_config(const RunConfig& cfg) {
  try {
    validate_params(cfg.benchmark);
    validate_grid(cfg.grid);
    validate_options(cfg.solver);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.lq.horizon < 1) throw ConfigError("lq.horizon must be at least 1");
  if (cfg.lq.r <= 0.0) throw ConfigError("lq.r must be positive");
  if (cfg.lq.q < 0.0) throw ConfigError("lq.q must be nonnegative");
  if (cfg.node_budget < 2) throw ConfigError("tree.node_budget is too small");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.study_x.empty()) throw ConfigError("study.x must not be empty");
  if (cfg.study_sigma.empty()) throw ConfigError("study.sigma must not be empty");
  for (double s : cfg.study_sigma) {
    if (!(s > 0.0)) throw ConfigError("study.sigma values must be strictly positive");
  }
  if (!(cfg.window_lo > 0.0) || !(cfg.window_hi > cfg.window_lo))
    throw ConfigError("study window must satisfy 0 < window_lo < window_hi");
  if (cfg.dp_sigma.empty()) throw ConfigError("dp.sigma must not be empty");
}

/// The configured LQ model; A and B fall back to the benchmark linearization
/// when not set explicitly.
inline LqModel lq_from_config(const RunConfig& cfg) {
  double a = cfg.lq.a, b = cfg.lq.b;
  if (!cfg.lq.a_set || !cfg.lq.b_set) {
    const BenchmarkModel bench(cfg.benchmark);
    if (!cfg.lq.a_set) a = bench.lin_a();
    if (!cfg.lq.b_set) b = bench.lin_b();
  }
  return make_lq_model(a, b, cfg.lq.q, cfg.lq.r, cfg.lq.horizon);
}

}  // namespace cecgap
