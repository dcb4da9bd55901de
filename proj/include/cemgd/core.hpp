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

#ifndef CEMGD_CORE_HPP_
#define CEMGD_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace cemgd {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T x d_a matrix of planned actions; row t is the action at step t.
using ActionSequence = RowMatrix;

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A rollout produced a non-finite state or gradient.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dynamics f(s, a) -> s' with a vector-Jacobian backward pass.
// backward writes (df/ds)^T g and (df/da)^T g for an upstream gradient g.
// Implementations must be reentrant: step/backward are const and pure.
template <class M>
concept DifferentiableModel =
    requires(const M& m, ConstVectorRef s, ConstVectorRef a, VectorRef out,
             VectorRef out2) {
      { m.state_dim() } -> std::convertible_to<int>;
      { m.action_dim() } -> std::convertible_to<int>;
      m.step(s, a, out);
      m.backward(s, a, s, out, out2);
    };

// Known reward r(s', a), paired with the *next* state.
template <class R>
concept RewardModel = requires(const R& r, ConstVectorRef s, ConstVectorRef a,
                               VectorRef out, VectorRef out2) {
  { r.reward(s, a) } -> std::convertible_to<double>;
  r.reward_backward(s, a, out, out2);
};

// Box constraints on a single action, applied to every row of a sequence.
struct ActionBounds {
  Vector low;
  Vector high;

  ActionBounds() = default;
  ActionBounds(Vector lo, Vector hi) : low(std::move(lo)), high(std::move(hi)) {
    validate();
  }

  // Same interval [lo, hi] on every one of `dim` coordinates.
  static ActionBounds uniform(int dim, double lo, double hi) {
    return ActionBounds(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
  }

  int dim() const { return static_cast<int>(low.size()); }

  void validate() const {
    if (low.size() != high.size()) {
      throw InvalidArgument("action bounds: low/high dimension mismatch");
    }
    for (Eigen::Index i = 0; i < low.size(); ++i) {
      if (!std::isfinite(low[i]) || !std::isfinite(high[i])) {
        throw InvalidArgument("action bounds must be finite");
      }
      if (low[i] > high[i]) {
        throw InvalidArgument("action bounds: low > high at index " +
                              std::to_string(i));
      }
    }
  }

  bool contains(const ActionSequence& seq) const {
    for (Eigen::Index t = 0; t < seq.rows(); ++t) {
      for (Eigen::Index j = 0; j < seq.cols(); ++j) {
        if (seq(t, j) < low[j] || seq(t, j) > high[j]) return false;
      }
    }
    return true;
  }
};

// Clamps every entry into its coordinate's bounds in place.
inline void project_inplace(ActionSequence& seq, const ActionBounds& bounds) {
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    for (Eigen::Index j = 0; j < seq.cols(); ++j) {
      seq(t, j) = std::clamp(seq(t, j), bounds.low[j], bounds.high[j]);
    }
  }
}

inline ActionSequence project(ActionSequence seq, const ActionBounds& bounds) {
  project_inplace(seq, bounds);
  return seq;
}

struct Trajectory {
  RowMatrix states;  // (T + 1) x d_s, states.row(0) = s0
  ActionSequence actions;
  Vector step_rewards;  // step_rewards[t] = r(states[t + 1], actions[t])
  double total_reward = 0.0;

  int horizon() const { return static_cast<int>(actions.rows()); }
};

// Left-to-right sum; the fixed order keeps rollouts bit-reproducible.
inline double sum_rewards(const Vector& step_rewards) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < step_rewards.size(); ++t) {
    total += step_rewards[t];
  }
  return total;
}

inline double total_reward(const Trajectory& traj) { return traj.total_reward; }

namespace detail {

inline bool all_finite(ConstVectorRef v) { return v.allFinite(); }

template <DifferentiableModel M>
void check_dims(const M& model, ConstVectorRef s0, const ActionSequence& seq) {
  if (s0.size() != model.state_dim()) {
    throw InvalidArgument("initial state has dimension " +
                          std::to_string(s0.size()) + ", model expects " +
                          std::to_string(model.state_dim()));
  }
  if (seq.cols() != model.action_dim()) {
    throw InvalidArgument("action sequence has " + std::to_string(seq.cols()) +
                          " columns, model expects " +
                          std::to_string(model.action_dim()));
  }
}

}  // namespace detail

template <DifferentiableModel M, RewardModel R>
Trajectory rollout(const M& model, const R& reward, ConstVectorRef s0,
                   const ActionSequence& seq) {
  detail::check_dims(model, s0, seq);
  const Eigen::Index horizon = seq.rows();
  Trajectory traj;
  traj.states.resize(horizon + 1, s0.size());
  traj.states.row(0) = s0.transpose();
  traj.actions = seq;
  traj.step_rewards.resize(horizon);

  Vector cur = s0;
  Vector next(s0.size());
  Vector action(seq.cols());
  for (Eigen::Index t = 0; t < horizon; ++t) {
    action = seq.row(t).transpose();
    model.step(cur, action, next);
    if (!detail::all_finite(next)) {
      throw DivergenceError("non-finite state in rollout", static_cast<int>(t));
    }
    traj.states.row(t + 1) = next.transpose();
    traj.step_rewards[t] = reward.reward(next, action);
    std::swap(cur, next);
  }
  traj.total_reward = sum_rewards(traj.step_rewards);
  return traj;
}

// Reusable buffers for allocation-free reward evaluation.
struct RolloutWorkspace {
  Vector cur;
  Vector next;
  Vector action;

  void resize(int state_dim, int action_dim) {
    cur.resize(state_dim);
    next.resize(state_dim);
    action.resize(action_dim);
  }
};

// Total reward of `seq` from s0, bit-identical to rollout(...).total_reward.
template <DifferentiableModel M, RewardModel R>
double evaluate(const M& model, const R& reward, ConstVectorRef s0,
                const ActionSequence& seq, RolloutWorkspace& ws) {
  ws.resize(static_cast<int>(s0.size()), static_cast<int>(seq.cols()));
  ws.cur = s0;
  double total = 0.0;
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    ws.action = seq.row(t).transpose();
    model.step(ws.cur, ws.action, ws.next);
    if (!detail::all_finite(ws.next)) {
      throw DivergenceError("non-finite state in rollout", static_cast<int>(t));
    }
    total += reward.reward(ws.next, ws.action);
    std::swap(ws.cur, ws.next);
  }
  return total;
}

template <DifferentiableModel M, RewardModel R>
double evaluate(const M& model, const R& reward, ConstVectorRef s0,
                const ActionSequence& seq) {
  detail::check_dims(model, s0, seq);
  RolloutWorkspace ws;
  return evaluate(model, reward, s0, seq, ws);
}

}  // namespace cemgd

#endif  // CEMGD_CORE_HPP_
