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

#ifndef CEMGD_GRADIENT_HPP_
#define CEMGD_GRADIENT_HPP_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cemgd/cem.hpp"
#include "cemgd/core.hpp"

namespace cemgd {

struct LineSearchConfig {
  double eta_init = 0.01;
  double rho = 0.67;
  int trials = 8;           // J
  int gradient_steps = 10;  // G

  void validate() const {
    if (!(eta_init > 0.0)) throw InvalidArgument("line search: eta_init <= 0");
    if (!(rho > 0.0 && rho < 1.0)) {
      throw InvalidArgument("line search: rho outside (0, 1)");
    }
    if (trials < 1) throw InvalidArgument("line search: trials < 1");
    if (gradient_steps < 0) throw InvalidArgument("line search: G < 0");
  }
};

struct RewardGradient {
  ActionSequence grad;  // dR/da, same shape as the sequence
  double reward = 0.0;  // R at the sequence, from the forward sweep
};

// Reverse-mode gradient of the total reward through the rollout.
template <DifferentiableModel M, RewardModel R>
RewardGradient reward_gradient(const M& model, const R& reward,
                               ConstVectorRef s0, const ActionSequence& seq) {
  const Trajectory traj = rollout(model, reward, s0, seq);
  const Eigen::Index horizon = seq.rows();
  const Eigen::Index sd = s0.size();
  const Eigen::Index ad = seq.cols();

  RewardGradient out;
  out.reward = traj.total_reward;
  out.grad.resize(horizon, ad);

  Vector carry = Vector::Zero(sd);  // dR/ds_{t+1} from steps after t
  Vector rs(sd), ra(ad), ds(sd), da(ad), s(sd), a(ad), next(sd);
  for (Eigen::Index t = horizon; t-- > 0;) {
    next = traj.states.row(t + 1).transpose();
    s = traj.states.row(t).transpose();
    a = seq.row(t).transpose();
    reward.reward_backward(next, a, rs, ra);
    carry += rs;
    model.backward(s, a, carry, ds, da);
    ra += da;
    if (!ra.allFinite() || !ds.allFinite()) {
      throw DivergenceError("non-finite reward gradient", static_cast<int>(t));
    }
    out.grad.row(t) = ra.transpose();
    carry = ds;
  }
  return out;
}

struct UpdateRecord {
  bool accepted = false;
  int trials_used = 0;
  double eta_used = 0.0;       // step size of the accepted (or last) trial
  double reward_after = 0.0;   // model reward of the sequence after the update
};

struct OptimizeTrace {
  std::vector<UpdateRecord> updates;
  double initial_reward = 0.0;
  double final_reward = 0.0;
  int rollouts = 0;  // gradient sweeps plus line-search candidate rollouts
};

struct LineSearchResult {
  ActionSequence sequence;
  bool accepted = false;
  UpdateRecord record;
};

// Tries project(seq + eta * grad) for eta = eta_init * rho^j, j < J, and
// accepts the first candidate whose reward strictly exceeds
// `current_reward`. On rejection the input is returned unchanged.
template <DifferentiableModel M, RewardModel R>
LineSearchResult line_search_update(const ActionSequence& seq,
                                    const ActionSequence& grad,
                                    double current_reward, const M& model,
                                    const R& reward, ConstVectorRef s0,
                                    const LineSearchConfig& cfg,
                                    const ActionBounds& bounds,
                                    std::vector<double>* etas_tried = nullptr) {
  RolloutWorkspace ws;
  double eta = cfg.eta_init;
  ActionSequence candidate(seq.rows(), seq.cols());
  for (int trial = 1; trial <= cfg.trials; ++trial) {
    if (etas_tried) etas_tried->push_back(eta);
    candidate = seq + eta * grad;
    project_inplace(candidate, bounds);
    const double r = evaluate(model, reward, s0, candidate, ws);
    if (r > current_reward) {
      return {candidate, true, {true, trial, eta, r}};
    }
    if (trial < cfg.trials) eta *= cfg.rho;
  }
  return {seq, false, {false, cfg.trials, eta, current_reward}};
}

// G rounds of (gradient, backtracking line search); eta restarts at eta_init
// every round.
template <DifferentiableModel M, RewardModel R>
std::pair<ActionSequence, OptimizeTrace> optimize(const ActionSequence& seq,
                                                  const M& model,
                                                  const R& reward,
                                                  ConstVectorRef s0,
                                                  const LineSearchConfig& cfg,
                                                  const ActionBounds& bounds) {
  cfg.validate();
  ActionSequence current = seq;
  OptimizeTrace trace;
  bool first = true;
  for (int g = 0; g < cfg.gradient_steps; ++g) {
    const RewardGradient rg = reward_gradient(model, reward, s0, current);
    ++trace.rollouts;
    if (first) {
      trace.initial_reward = rg.reward;
      first = false;
    }
    LineSearchResult ls = line_search_update(current, rg.grad, rg.reward, model,
                                             reward, s0, cfg, bounds);
    trace.rollouts += ls.record.trials_used;
    trace.updates.push_back(ls.record);
    if (ls.accepted) current = std::move(ls.sequence);
  }
  if (first) {
    trace.initial_reward = evaluate(model, reward, s0, current);
    ++trace.rollouts;
    trace.final_reward = trace.initial_reward;
  } else {
    trace.final_reward = trace.updates.back().reward_after;
  }
  return {std::move(current), std::move(trace)};
}

// Pure first-order planner: a single random start drawn from
// N(0, initial_variance * I), clamped, then optimize().
template <DifferentiableModel M, RewardModel R>
std::pair<ActionSequence, OptimizeTrace> baseline_gradient_plan(
    const M& model, const R& reward, ConstVectorRef s0, int horizon,
    const LineSearchConfig& cfg, const ActionBounds& bounds, Rng& rng,
    double initial_variance = 1.0) {
  const SamplingDistribution init =
      SamplingDistribution::zero_mean(horizon, bounds.dim(), initial_variance);
  ActionSequence start = sample(init, 1, bounds, rng).front();
  return optimize(start, model, reward, s0, cfg, bounds);
}

}  // namespace cemgd

#endif  // CEMGD_GRADIENT_HPP_
