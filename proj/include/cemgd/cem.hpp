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

#ifndef CEMGD_CEM_HPP_
#define CEMGD_CEM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cemgd/core.hpp"

namespace cemgd {

using Rng = std::mt19937_64;

inline constexpr double kDefaultVarianceFloor = 1e-6;

// Independent Gaussian per action entry.
struct SamplingDistribution {
  RowMatrix mean;
  RowMatrix variance;

  static SamplingDistribution isotropic(RowMatrix mean, double variance) {
    RowMatrix var = RowMatrix::Constant(mean.rows(), mean.cols(), variance);
    return {std::move(mean), std::move(var)};
  }
  static SamplingDistribution zero_mean(int horizon, int action_dim,
                                        double variance) {
    return isotropic(RowMatrix::Zero(horizon, action_dim), variance);
  }

  int horizon() const { return static_cast<int>(mean.rows()); }
  int action_dim() const { return static_cast<int>(mean.cols()); }
};

// Draws n sequences. Entries are drawn sequence-major, row-major within a
// sequence, one standard normal per entry, then clamped into bounds.
inline std::vector<ActionSequence> sample(const SamplingDistribution& dist,
                                          int n, const ActionBounds& bounds,
                                          Rng& rng) {
  if (n < 1) throw InvalidArgument("sample: n must be >= 1");
  if (bounds.dim() != dist.action_dim()) {
    throw InvalidArgument("sample: bounds dimension mismatch");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const RowMatrix stddev = dist.variance.cwiseMax(0.0).cwiseSqrt();
  std::vector<ActionSequence> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ActionSequence seq(dist.mean.rows(), dist.mean.cols());
    for (Eigen::Index t = 0; t < seq.rows(); ++t) {
      for (Eigen::Index j = 0; j < seq.cols(); ++j) {
        seq(t, j) = dist.mean(t, j) + stddev(t, j) * normal(rng);
      }
    }
    project_inplace(seq, bounds);
    out.push_back(std::move(seq));
  }
  return out;
}

// mean <- (1 - alpha) mean + alpha * mean(elites)
// var  <- (1 - alpha) var  + alpha * popvar(elites), floored.
inline SamplingDistribution update_distribution(
    const SamplingDistribution& dist, std::span<const ActionSequence> elites,
    double alpha, double variance_floor = kDefaultVarianceFloor) {
  if (elites.empty()) throw InvalidArgument("update_distribution: no elites");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("update_distribution: alpha outside [0, 1]");
  }
  const double k = static_cast<double>(elites.size());
  RowMatrix elite_mean = RowMatrix::Zero(dist.mean.rows(), dist.mean.cols());
  for (const ActionSequence& e : elites) {
    if (e.rows() != dist.mean.rows() || e.cols() != dist.mean.cols()) {
      throw InvalidArgument("update_distribution: elite shape mismatch");
    }
    elite_mean += e;
  }
  elite_mean /= k;
  RowMatrix elite_var = RowMatrix::Zero(dist.mean.rows(), dist.mean.cols());
  for (const ActionSequence& e : elites) {
    elite_var.array() += (e - elite_mean).array().square();
  }
  elite_var /= k;

  SamplingDistribution next;
  next.mean = (1.0 - alpha) * dist.mean + alpha * elite_mean;
  next.variance = ((1.0 - alpha) * dist.variance + alpha * elite_var)
                      .cwiseMax(variance_floor);
  return next;
}

struct ScoredSequence {
  ActionSequence actions;
  double reward = 0.0;
  std::int64_t index = 0;  // position in draw order across all iterations
};

// Ordering used everywhere: higher reward first, earlier draw on ties.
inline bool ranks_before(const ScoredSequence& a, const ScoredSequence& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return a.index < b.index;
}

struct CemOptions {
  int samples_per_iter = 100;  // n
  int iterations = 5;          // m
  int k_elite = 10;
  double alpha = 0.1;
  double variance_floor = kDefaultVarianceFloor;
  int keep_top = 0;  // size of the pooled top list; 0 means k_elite
};

struct CemResult {
  ActionSequence best_sequence;
  double best_reward = 0.0;
  std::vector<ScoredSequence> top_k;  // pooled over all iterations
  int samples_used = 0;
  SamplingDistribution final_distribution;
  std::vector<double> best_reward_by_iteration;  // running maximum
};

template <DifferentiableModel M, RewardModel R>
CemResult run_cem(const M& model, const R& reward, ConstVectorRef s0,
                  const SamplingDistribution& init, const CemOptions& opt,
                  const ActionBounds& bounds, Rng& rng) {
  if (opt.samples_per_iter < 1 || opt.iterations < 1) {
    throw InvalidArgument("run_cem: n and m must be >= 1");
  }
  if (opt.k_elite < 1 || opt.k_elite > opt.samples_per_iter) {
    throw InvalidArgument("run_cem: k_elite must lie in [1, n]");
  }
  const int keep = opt.keep_top > 0 ? opt.keep_top : opt.k_elite;
  detail::check_dims(model, s0, init.mean);

  CemResult result;
  SamplingDistribution dist = init;
  RolloutWorkspace ws;
  std::vector<ScoredSequence> pool;
  std::int64_t next_index = 0;

  for (int it = 0; it < opt.iterations; ++it) {
    std::vector<ActionSequence> draws =
        sample(dist, opt.samples_per_iter, bounds, rng);
    std::vector<ScoredSequence> scored(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
      double r;
      try {
        r = evaluate(model, reward, s0, draws[i], ws);
      } catch (const DivergenceError& e) {
        throw DivergenceError("cem iteration " + std::to_string(it) + ": " +
                                  e.what(),
                              e.step());
      }
      scored[i] = {std::move(draws[i]), r, next_index++};
    }
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return ranks_before(scored[a], scored[b]);
                     });

    std::vector<ActionSequence> elites;
    elites.reserve(opt.k_elite);
    for (int e = 0; e < opt.k_elite; ++e) {
      elites.push_back(scored[order[e]].actions);
    }
    dist = update_distribution(dist, elites, opt.alpha, opt.variance_floor);

    const std::size_t take = std::min<std::size_t>(keep, order.size());
    for (std::size_t e = 0; e < take; ++e) {
      pool.push_back(std::move(scored[order[e]]));
    }
    std::sort(pool.begin(), pool.end(), ranks_before);
    if (pool.size() > static_cast<std::size_t>(keep)) pool.resize(keep);
    result.best_reward_by_iteration.push_back(pool.front().reward);
  }

  result.samples_used = opt.samples_per_iter * opt.iterations;
  result.best_sequence = pool.front().actions;
  result.best_reward = pool.front().reward;
  result.top_k = std::move(pool);
  result.final_distribution = std::move(dist);
  return result;
}

}  // namespace cemgd

#endif  // CEMGD_CEM_HPP_
