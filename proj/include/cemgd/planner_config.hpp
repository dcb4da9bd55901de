// Copyright 2026 The CEM-GD Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CEMGD_PLANNER_CONFIG_HPP_
#define CEMGD_PLANNER_CONFIG_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include "cemgd/core.hpp"

namespace cemgd {

// A sample budget N = samples_per_iter * iterations.
struct SampleSplit {
  int samples_per_iter = 0;
  int iterations = 0;

  int total() const { return samples_per_iter * iterations; }
  bool operator==(const SampleSplit&) const = default;
};

// Factorization used when only a total budget is given. The known budgets
// follow the reference baseline settings; anything else uses 5 iterations
// when the budget divides evenly, otherwise a single iteration.
inline SampleSplit default_split(int budget) {
  if (budget <= 0) throw InvalidArgument("sample budget must be positive");
  switch (budget) {
    case 50:
      return {10, 5};
    case 500:
      return {100, 5};
    case 5000:
      return {100, 50};
    case 15000:
      return {1000, 15};
    default:
      break;
  }
  if (budget % 5 == 0 && budget >= 10) return {budget / 5, 5};
  return {budget, 1};
}

// Elite count used when none is configured: 10% of the population.
inline int default_elite_count(int samples_per_iter) {
  return std::max(static_cast<int>(std::ceil(0.1 * samples_per_iter)), 1);
}

struct PlannerConfig {
  int horizon = 45;
  SampleSplit initial{1000, 15};  // N_init, used at t = 0
  SampleSplit replan{10, 5};      // N_r, used at t > 0
  double alpha = 0.1;
  int k_elite = 0;  // 0 selects default_elite_count(n) per phase
  int k = 1;        // sequences refined by gradient ascent
  int gradient_steps = 10;       // G
  int line_search_trials = 8;    // J
  double eta_init = 0.01;
  double rho = 0.67;
  double variance_floor = 1e-6;
  double initial_variance = 1.0;

  int n_init() const { return initial.total(); }
  int n_r() const { return replan.total(); }

  int elite_count(int samples_per_iter) const {
    return k_elite > 0 ? k_elite : default_elite_count(samples_per_iter);
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw InvalidArgument("planner config: " + field + " " + why);
    };
    if (horizon < 1) fail("horizon", "must be positive");
    if (initial.samples_per_iter < 1 || initial.iterations < 1) {
      fail("initial", "split must be positive");
    }
    if (replan.samples_per_iter < 1 || replan.iterations < 1) {
      fail("replan", "split must be positive");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha", "must lie in (0, 1]");
    if (k_elite < 0) fail("k_elite", "must be nonnegative");
    if (k < 1) fail("k", "must be positive");
    for (const SampleSplit& split : {initial, replan}) {
      const int elites = elite_count(split.samples_per_iter);
      if (elites > split.samples_per_iter) {
        fail("k_elite", "exceeds samples per iteration");
      }
      if (k > elites) fail("k", "exceeds elite count");
    }
    if (gradient_steps < 0) fail("gradient_steps", "must be nonnegative");
    if (line_search_trials < 1) fail("line_search_trials", "must be positive");
    if (!(eta_init > 0.0)) fail("eta_init", "must be positive");
    if (!(rho > 0.0 && rho < 1.0)) fail("rho", "must lie in (0, 1)");
    if (!(variance_floor >= 0.0)) fail("variance_floor", "must be >= 0");
    if (!(initial_variance >= 0.0)) fail("initial_variance", "must be >= 0");
  }
};

}  // namespace cemgd

#endif  // CEMGD_PLANNER_CONFIG_HPP_
