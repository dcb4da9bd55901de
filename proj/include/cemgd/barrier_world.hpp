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

#ifndef CEMGD_BARRIER_WORLD_HPP_
#define CEMGD_BARRIER_WORLD_HPP_

#include <cmath>

#include "cemgd/core.hpp"

namespace cemgd {

struct BarrierParams {
  double center_x = 0.0;
  double center_y = 0.03;
  double radius = 0.4;
  double gain = 5.0;  // repulsion strength
  double goal_x = 1.0;
  double goal_y = 0.0;
  double start_x = -1.0;
  double start_y = 0.0;
  double dt = 0.03;
  double action_limit = 2.0;  // bounds are [-limit, limit] on both axes
  double action_cost = 0.01;  // lambda
  double smoothing = 1e-6;    // epsilon in the smoothed distance

  void validate() const {
    if (!(center_y > 0.0)) {
      throw InvalidArgument("barrier: center_y must be > 0");
    }
    if (!(radius > 0.0)) throw InvalidArgument("barrier: radius must be > 0");
    if (!(gain > 0.0)) throw InvalidArgument("barrier: gain must be > 0");
    if (!(dt > 0.0)) throw InvalidArgument("barrier: dt must be > 0");
    if (!(action_limit > 0.0)) {
      throw InvalidArgument("barrier: action_limit must be > 0");
    }
    if (!(action_cost >= 0.0)) {
      throw InvalidArgument("barrier: action_cost must be >= 0");
    }
  }
};

// Point agent on a plane with a circular repulsive potential between the
// start and the goal. Models both the dynamics and the reward.
//
//   s' = s + dt * a + dt * F(s),
//   F(s) = gain * (radius - d) * (s - c) / d   if d < radius, else 0,
//   d = sqrt(|s - c|^2 + eps^2).
//
//   r(s', a) = -|s' - goal|^2 - action_cost * |a|^2.
class BarrierWorld {
 public:
  BarrierWorld() : BarrierWorld(BarrierParams{}) {}
  explicit BarrierWorld(const BarrierParams& params) : p_(params) {
    p_.validate();
  }

  const BarrierParams& params() const { return p_; }
  int state_dim() const { return 2; }
  int action_dim() const { return 2; }

  Vector initial_state() const { return Vector{{p_.start_x, p_.start_y}}; }
  ActionBounds bounds() const {
    return ActionBounds::uniform(2, -p_.action_limit, p_.action_limit);
  }

  // Repulsive force at position (x, y).
  Eigen::Vector2d force(double x, double y) const {
    const double ux = x - p_.center_x;
    const double uy = y - p_.center_y;
    const double d = smoothed_distance(ux, uy);
    if (d >= p_.radius) return Eigen::Vector2d::Zero();
    const double scale = p_.gain * (p_.radius - d) / d;
    return {scale * ux, scale * uy};
  }

  void step(ConstVectorRef s, ConstVectorRef a, VectorRef s_next) const {
    const Eigen::Vector2d f = force(s[0], s[1]);
    s_next[0] = s[0] + p_.dt * a[0] + p_.dt * f[0];
    s_next[1] = s[1] + p_.dt * a[1] + p_.dt * f[1];
  }

  void backward(ConstVectorRef s, ConstVectorRef /*a*/, ConstVectorRef g,
                VectorRef grad_s, VectorRef grad_a) const {
    const double ux = s[0] - p_.center_x;
    const double uy = s[1] - p_.center_y;
    const double d = smoothed_distance(ux, uy);
    grad_s[0] = g[0];
    grad_s[1] = g[1];
    if (d < p_.radius) {
      // dF/du = gain * [(radius/d - 1) I - radius * u u^T / d^3], symmetric.
      const double diag = p_.gain * (p_.radius / d - 1.0);
      const double outer = p_.gain * p_.radius / (d * d * d);
      const double ug = ux * g[0] + uy * g[1];
      grad_s[0] += p_.dt * (diag * g[0] - outer * ux * ug);
      grad_s[1] += p_.dt * (diag * g[1] - outer * uy * ug);
    }
    grad_a[0] = p_.dt * g[0];
    grad_a[1] = p_.dt * g[1];
  }

  double reward(ConstVectorRef s_next, ConstVectorRef a) const {
    const double dx = s_next[0] - p_.goal_x;
    const double dy = s_next[1] - p_.goal_y;
    return -(dx * dx + dy * dy) - p_.action_cost * (a[0] * a[0] + a[1] * a[1]);
  }

  void reward_backward(ConstVectorRef s_next, ConstVectorRef a,
                       VectorRef grad_s, VectorRef grad_a) const {
    grad_s[0] = -2.0 * (s_next[0] - p_.goal_x);
    grad_s[1] = -2.0 * (s_next[1] - p_.goal_y);
    grad_a[0] = -2.0 * p_.action_cost * a[0];
    grad_a[1] = -2.0 * p_.action_cost * a[1];
  }

 private:
  double smoothed_distance(double ux, double uy) const {
    return std::sqrt(ux * ux + uy * uy + p_.smoothing * p_.smoothing);
  }

  BarrierParams p_;
};

}  // namespace cemgd

#endif  // CEMGD_BARRIER_WORLD_HPP_
