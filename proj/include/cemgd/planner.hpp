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

#ifndef CEMGD_PLANNER_HPP_
#define CEMGD_PLANNER_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cemgd/cem.hpp"
#include "cemgd/core.hpp"
#include "cemgd/gradient.hpp"
#include "cemgd/planner_config.hpp"

namespace cemgd {

// Carried between plan() calls by the caller.
struct PlannerState {
  std::optional<ActionSequence> previous_optimal;
  int timestep = 0;

  void validate() const {
    if (timestep < 0) throw InvalidArgument("planner state: negative timestep");
    if (previous_optimal.has_value() != (timestep > 0)) {
      throw InvalidArgument(
          "planner state: previous_optimal must be present iff timestep > 0");
    }
  }
};

struct PlanDiagnostics {
  double cem_best_reward = 0.0;
  std::vector<double> post_gradient_rewards;  // one per refined elite
  int samples_used = 0;                       // CEM rollouts only
  int gradient_rollouts = 0;                  // sweeps, trials, re-evaluation
  std::vector<OptimizeTrace> gradient_traces;
  int memory_proxy = 0;  // sequences resident at peak: n + k
  RowMatrix initial_mean;
};

struct PlanOutput {
  Vector action;
  ActionSequence optimal_sequence;
  double model_reward = 0.0;
  PlanDiagnostics diagnostics;
};

// Drops the first row and repeats the last: (r0, ..., rT-1) ->
// (r1, ..., rT-1, rT-1).
inline ActionSequence warm_start_mean(const ActionSequence& prev) {
  if (prev.rows() < 1) throw InvalidArgument("warm_start_mean: empty sequence");
  ActionSequence out(prev.rows(), prev.cols());
  const Eigen::Index horizon = prev.rows();
  if (horizon > 1) out.topRows(horizon - 1) = prev.bottomRows(horizon - 1);
  out.row(horizon - 1) = prev.row(horizon - 1);
  return out;
}

inline LineSearchConfig line_search_config(const PlannerConfig& cfg) {
  return {cfg.eta_init, cfg.rho, cfg.line_search_trials, cfg.gradient_steps};
}

// One call of the hybrid planner: CEM with N_init samples (t = 0, zero
// mean) or N_r samples (t > 0, shifted previous plan as mean), gradient
// refinement of the top k, and selection of the best refined sequence.
template <DifferentiableModel M, RewardModel R>
std::pair<PlanOutput, PlannerState> plan(const PlannerState& state,
                                         ConstVectorRef s_t, const M& model,
                                         const R& reward,
                                         const PlannerConfig& cfg,
                                         const ActionBounds& bounds, Rng& rng) {
  state.validate();
  cfg.validate();
  if (bounds.dim() != model.action_dim()) {
    throw InvalidArgument("plan: bounds dimension does not match the model");
  }

  const bool first = state.timestep == 0;
  const SampleSplit split = first ? cfg.initial : cfg.replan;
  RowMatrix mean = first ? RowMatrix::Zero(cfg.horizon, model.action_dim())
                         : warm_start_mean(*state.previous_optimal);
  if (mean.rows() != cfg.horizon) {
    throw InvalidArgument("plan: previous plan length differs from horizon");
  }

  CemOptions cem_opt;
  cem_opt.samples_per_iter = split.samples_per_iter;
  cem_opt.iterations = split.iterations;
  cem_opt.k_elite = cfg.elite_count(split.samples_per_iter);
  cem_opt.alpha = cfg.alpha;
  cem_opt.variance_floor = cfg.variance_floor;
  cem_opt.keep_top = std::max(cfg.k, cem_opt.k_elite);

  PlanOutput out;
  out.diagnostics.initial_mean = mean;
  const SamplingDistribution init =
      SamplingDistribution::isotropic(std::move(mean), cfg.initial_variance);

  CemResult cem;
  try {
    cem = run_cem(model, reward, s_t, init, cem_opt, bounds, rng);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string("plan/cem: ") + e.what(), e.step());
  }
  out.diagnostics.cem_best_reward = cem.best_reward;
  out.diagnostics.samples_used = cem.samples_used;
  out.diagnostics.memory_proxy = split.samples_per_iter + cfg.k;

  const LineSearchConfig ls = line_search_config(cfg);
  std::vector<ActionSequence> refined;
  refined.reserve(cfg.k);
  for (int i = 0; i < cfg.k; ++i) {
    try {
      auto [seq, trace] =
          optimize(cem.top_k[i].actions, model, reward, s_t, ls, bounds);
      out.diagnostics.gradient_rollouts += trace.rollouts;
      out.diagnostics.gradient_traces.push_back(std::move(trace));
      refined.push_back(std::move(seq));
    } catch (const DivergenceError& e) {
      throw DivergenceError("plan/gradient elite " + std::to_string(i) + ": " +
                                e.what(),
                            e.step());
    }
  }

  // Re-evaluate every refined sequence; lowest elite index wins ties.
  RolloutWorkspace ws;
  int winner = 0;
  for (int i = 0; i < cfg.k; ++i) {
    const double r = evaluate(model, reward, s_t, refined[i], ws);
    ++out.diagnostics.gradient_rollouts;
    out.diagnostics.post_gradient_rewards.push_back(r);
    if (r > out.diagnostics.post_gradient_rewards[winner]) winner = i;
  }

  out.model_reward = out.diagnostics.post_gradient_rewards[winner];
  out.optimal_sequence = std::move(refined[winner]);
  out.action = out.optimal_sequence.row(0).transpose();

  PlannerState next;
  next.previous_optimal = out.optimal_sequence;
  next.timestep = state.timestep + 1;
  return {std::move(out), std::move(next)};
}

}  // namespace cemgd

#endif  // CEMGD_PLANNER_HPP_
