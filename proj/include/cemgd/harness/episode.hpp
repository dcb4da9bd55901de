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

#ifndef CEMGD_HARNESS_EPISODE_HPP_
#define CEMGD_HARNESS_EPISODE_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cemgd/barrier_world.hpp"
#include "cemgd/cem.hpp"
#include "cemgd/core.hpp"
#include "cemgd/gradient.hpp"
#include "cemgd/planner.hpp"
#include "cemgd/planner_config.hpp"

namespace cemgd::harness {

enum class PlannerKind { kCem, kGradient, kCemGd };

inline std::string to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kCem:
      return "cem";
    case PlannerKind::kGradient:
      return "gradient";
    case PlannerKind::kCemGd:
      return "cem-gd";
  }
  return "unknown";
}

// A planner as used by the MPC loop. `config` supplies the horizon, the
// line-search settings and (for the hybrid planner) the N_init / N_r
// splits; `cem_split` is the budget of the plain CEM baseline.
struct PlannerSpec {
  std::string id;
  PlannerKind kind = PlannerKind::kCemGd;
  PlannerConfig config;
  SampleSplit cem_split{100, 5};

  static PlannerSpec cem(SampleSplit split, PlannerConfig base = {}) {
    return {"cem-" + std::to_string(split.total()), PlannerKind::kCem,
            std::move(base), split};
  }
  static PlannerSpec cem(int budget, PlannerConfig base = {}) {
    return cem(default_split(budget), std::move(base));
  }
  static PlannerSpec gradient(PlannerConfig base = {}) {
    return {"gradient", PlannerKind::kGradient, std::move(base), {}};
  }
  static PlannerSpec cem_gd(PlannerConfig base = {}) {
    return {"cem-gd", PlannerKind::kCemGd, std::move(base), {}};
  }
};

struct StepPlan {
  Vector action;
  double model_reward = 0.0;
  int samples_used = 0;
  int gradient_rollouts = 0;
  int memory_proxy = 0;
};

// Receding-horizon wrapper that gives the three planners one interface and
// owns the warm-start state between calls.
template <DifferentiableModel M, RewardModel R>
class MpcPlanner {
 public:
  MpcPlanner(PlannerSpec spec, const M& model, const R& reward,
             ActionBounds bounds)
      : spec_(std::move(spec)),
        model_(model),
        reward_(reward),
        bounds_(std::move(bounds)) {
    spec_.config.validate();
  }

  const PlannerSpec& spec() const { return spec_; }
  const PlannerState& state() const { return state_; }
  void reset() { state_ = PlannerState{}; }

  StepPlan plan(ConstVectorRef s, Rng& rng) {
    switch (spec_.kind) {
      case PlannerKind::kCemGd:
        return plan_hybrid(s, rng);
      case PlannerKind::kCem:
        return plan_cem(s, rng);
      case PlannerKind::kGradient:
        return plan_gradient(s, rng);
    }
    throw InvalidArgument("unknown planner kind");
  }

 private:
  StepPlan plan_hybrid(ConstVectorRef s, Rng& rng) {
    auto [out, next] =
        cemgd::plan(state_, s, model_, reward_, spec_.config, bounds_, rng);
    state_ = std::move(next);
    return {out.action, out.model_reward, out.diagnostics.samples_used,
            out.diagnostics.gradient_rollouts, out.diagnostics.memory_proxy};
  }

  // CEM baseline, warm-started with the shifted previous best sequence.
  StepPlan plan_cem(ConstVectorRef s, Rng& rng) {
    const PlannerConfig& cfg = spec_.config;
    RowMatrix mean = state_.previous_optimal
                         ? warm_start_mean(*state_.previous_optimal)
                         : RowMatrix::Zero(cfg.horizon, model_.action_dim());
    CemOptions opt;
    opt.samples_per_iter = spec_.cem_split.samples_per_iter;
    opt.iterations = spec_.cem_split.iterations;
    opt.k_elite = cfg.elite_count(opt.samples_per_iter);
    opt.alpha = cfg.alpha;
    opt.variance_floor = cfg.variance_floor;
    opt.keep_top = 1;
    const CemResult res = run_cem(
        model_, reward_, s,
        SamplingDistribution::isotropic(std::move(mean), cfg.initial_variance),
        opt, bounds_, rng);
    state_.previous_optimal = res.best_sequence;
    ++state_.timestep;
    return {res.best_sequence.row(0).transpose(), res.best_reward,
            res.samples_used, 0, opt.samples_per_iter};
  }

  StepPlan plan_gradient(ConstVectorRef s, Rng& rng) {
    const PlannerConfig& cfg = spec_.config;
    auto [seq, trace] =
        baseline_gradient_plan(model_, reward_, s, cfg.horizon,
                               line_search_config(cfg), bounds_, rng,
                               cfg.initial_variance);
    ++state_.timestep;
    state_.previous_optimal = seq;
    return {seq.row(0).transpose(), trace.final_reward, 0, trace.rollouts, 1};
  }

  PlannerSpec spec_;
  const M& model_;
  const R& reward_;
  ActionBounds bounds_;
  PlannerState state_;
};

struct StepRecord {
  double true_reward = 0.0;
  double model_reward = 0.0;  // planner-internal prediction for its plan
  int samples_used = 0;
  int gradient_rollouts = 0;
  int memory_proxy = 0;
  double plan_seconds = 0.0;
};

// Route classification of a barrier-world trajectory.
struct BarrierOutcome {
  bool reached_goal = false;  // final distance to goal < tolerance
  bool went_below = false;    // y < c_y whenever x is within the barrier span
  bool went_above = false;    // y > c_y when x first reaches c_x

  bool success() const { return reached_goal && went_below; }
};

inline BarrierOutcome barrier_outcome(const BarrierParams& p,
                                      const RowMatrix& states,
                                      double goal_tolerance) {
  BarrierOutcome out;
  out.went_below = true;
  bool crossed = false;
  for (Eigen::Index t = 0; t < states.rows(); ++t) {
    const double x = states(t, 0);
    const double y = states(t, 1);
    if (x >= p.center_x - p.radius && x <= p.center_x + p.radius &&
        !(y < p.center_y)) {
      out.went_below = false;
    }
    if (!crossed && x >= p.center_x) {
      crossed = true;
      out.went_above = y > p.center_y;
    }
  }
  const Eigen::Index last = states.rows() - 1;
  const double dx = states(last, 0) - p.goal_x;
  const double dy = states(last, 1) - p.goal_y;
  out.reached_goal = std::sqrt(dx * dx + dy * dy) < goal_tolerance;
  return out;
}

struct EpisodeResult {
  std::string env_id;
  std::string planner_id;
  std::uint64_t seed = 0;
  double episode_reward = 0.0;  // sum of true-environment step rewards
  std::vector<StepRecord> steps;
  RowMatrix states;  // (executed steps + 1) x d_s, true environment
  std::optional<BarrierOutcome> barrier;
  std::string error;      // empty when the episode completed
  int failed_step = -1;

  bool ok() const { return error.empty(); }
};

// MPC loop: plan with (model, reward), execute the first action in the true
// environment, observe the true next state, repeat for `horizon_steps`.
template <class Env, DifferentiableModel M, RewardModel R>
EpisodeResult run_episode(const Env& true_env, const M& model, const R& reward,
                          const PlannerSpec& spec, int horizon_steps,
                          std::uint64_t seed, std::string env_id) {
  if (horizon_steps < 1) throw InvalidArgument("episode length must be >= 1");
  EpisodeResult result;
  result.env_id = std::move(env_id);
  result.planner_id = spec.id;
  result.seed = seed;

  Rng rng(seed);
  MpcPlanner<M, R> planner(spec, model, reward, true_env.bounds());
  Vector s = true_env.initial_state();
  Vector next(s.size());
  std::vector<Vector> visited{s};
  for (int t = 0; t < horizon_steps; ++t) {
    StepPlan step;
    const auto start = std::chrono::steady_clock::now();
    try {
      step = planner.plan(s, rng);
    } catch (const Error& e) {
      result.error = e.what();
      result.failed_step = t;
      break;
    }
    const auto stop = std::chrono::steady_clock::now();
    true_env.step(s, step.action, next);
    StepRecord rec;
    rec.true_reward = true_env.reward(next, step.action);
    rec.model_reward = step.model_reward;
    rec.samples_used = step.samples_used;
    rec.gradient_rollouts = step.gradient_rollouts;
    rec.memory_proxy = step.memory_proxy;
    rec.plan_seconds = std::chrono::duration<double>(stop - start).count();
    result.steps.push_back(rec);
    result.episode_reward += rec.true_reward;
    s = next;
    visited.push_back(s);
  }
  result.states.resize(static_cast<Eigen::Index>(visited.size()), s.size());
  for (std::size_t i = 0; i < visited.size(); ++i) {
    result.states.row(static_cast<Eigen::Index>(i)) = visited[i].transpose();
  }
  return result;
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_EPISODE_HPP_
