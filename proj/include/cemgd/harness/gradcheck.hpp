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

#ifndef CEMGD_HARNESS_GRADCHECK_HPP_
#define CEMGD_HARNESS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cemgd/barrier_world.hpp"
#include "cemgd/cartpole.hpp"
#include "cemgd/cem.hpp"
#include "cemgd/core.hpp"
#include "cemgd/gradient.hpp"
#include "cemgd/mlp.hpp"

namespace cemgd::harness {

// ||g - fd||_inf / max(||fd||_inf, ||g||_inf, tiny).
inline double relative_error(const ActionSequence& analytic,
                             const ActionSequence& numeric) {
  const double scale = std::max({numeric.cwiseAbs().maxCoeff(),
                                 analytic.cwiseAbs().maxCoeff(), 1e-12});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

// Central differences of the total reward in every sequence entry.
template <DifferentiableModel M, RewardModel R>
ActionSequence finite_difference_gradient(const M& model, const R& reward,
                                          ConstVectorRef s0,
                                          const ActionSequence& seq, double h) {
  ActionSequence grad(seq.rows(), seq.cols());
  ActionSequence probe = seq;
  RolloutWorkspace ws;
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    for (Eigen::Index j = 0; j < seq.cols(); ++j) {
      const double x = seq(t, j);
      probe(t, j) = x + h;
      const double up = evaluate(model, reward, s0, probe, ws);
      probe(t, j) = x - h;
      const double down = evaluate(model, reward, s0, probe, ws);
      probe(t, j) = x;
      grad(t, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

struct GradcheckReport {
  std::string target;
  int probes = 0;
  double max_relative_error = 0.0;
  int worst_probe = -1;
  double tolerance = 0.0;

  bool passed() const { return max_relative_error < tolerance; }
};

inline const std::vector<std::string>& gradcheck_targets() {
  static const std::vector<std::string> names = {"barrier", "cartpole", "mlp"};
  return names;
}

namespace detail {

inline Vector uniform_vector(const Vector& low, const Vector& high, Rng& rng) {
  Vector v(low.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = std::uniform_real_distribution<double>(low[i], high[i])(rng);
  }
  return v;
}

inline ActionSequence uniform_sequence(int horizon, const ActionBounds& bounds,
                                       Rng& rng) {
  ActionSequence seq(horizon, bounds.dim());
  for (int t = 0; t < horizon; ++t) {
    seq.row(t) = uniform_vector(bounds.low, bounds.high, rng).transpose();
  }
  return seq;
}

template <DifferentiableModel M, RewardModel R>
GradcheckReport check_probes(std::string target, const M& model, const R& reward,
                             const ActionBounds& bounds, const Vector& state_low,
                             const Vector& state_high, int probes, int horizon,
                             double h, double tolerance, Rng& rng) {
  GradcheckReport rep{std::move(target), probes, 0.0, -1, tolerance};
  for (int p = 0; p < probes; ++p) {
    const Vector s0 = uniform_vector(state_low, state_high, rng);
    const ActionSequence seq = uniform_sequence(horizon, bounds, rng);
    const RewardGradient g = reward_gradient(model, reward, s0, seq);
    const ActionSequence fd = finite_difference_gradient(model, reward, s0, seq, h);
    const double err = relative_error(g.grad, fd);
    if (err > rep.max_relative_error || rep.worst_probe < 0) {
      rep.max_relative_error = err;
      rep.worst_probe = p;
    }
  }
  return rep;
}

}  // namespace detail

// Tolerances: 1e-5 for the analytic environments, 1e-4 for the MLP.
inline GradcheckReport run_gradcheck(const std::string& target,
                                     const BarrierParams& barrier,
                                     const CartPoleParams& cartpole, int probes,
                                     int horizon, double h, std::uint64_t seed) {
  if (probes < 1 || horizon < 1) {
    throw InvalidArgument("gradcheck: probes and horizon must be >= 1");
  }
  Rng rng(seed);
  if (target == "barrier") {
    const BarrierWorld env(barrier);
    // Start positions cover the barrier interior and its surroundings.
    const Vector lo{{barrier.center_x - 3 * barrier.radius,
                     barrier.center_y - 3 * barrier.radius}};
    const Vector hi{{barrier.center_x + 3 * barrier.radius,
                     barrier.center_y + 3 * barrier.radius}};
    return detail::check_probes(target, env, env, env.bounds(), lo, hi, probes,
                                horizon, h, 1e-5, rng);
  }
  if (target == "cartpole") {
    const CartPole env(cartpole);
    const Vector lo{{-1.0, -1.0, -std::numbers::pi, -2.0}};
    const Vector hi{{1.0, 1.0, std::numbers::pi, 2.0}};
    return detail::check_probes(target, env, env, env.bounds(), lo, hi, probes,
                                horizon, h, 1e-5, rng);
  }
  if (target == "mlp") {
    // Tiny random network on the barrier state/action space, scored with the
    // barrier reward.
    const BarrierWorld env(barrier);
    const MlpModel model = MlpModel::random(2, 2, {8, 8}, rng);
    const Vector lo{{-1.0, -1.0}};
    const Vector hi{{1.0, 1.0}};
    return detail::check_probes(target, model, env, env.bounds(), lo, hi, probes,
                                horizon, h, 1e-4, rng);
  }
  throw InvalidArgument("unknown gradcheck target '" + target +
                        "'; valid targets: " + join(gradcheck_targets()));
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_GRADCHECK_HPP_
