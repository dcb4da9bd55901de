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

#ifndef CEMGD_CARTPOLE_HPP_
#define CEMGD_CARTPOLE_HPP_

#include <cmath>
#include <numbers>

#include "cemgd/core.hpp"

namespace cemgd {

struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 1.75;  // long pole: slower dynamics, harder swing-up
  double gravity = 9.8;
  double dt = 0.05;
  double force_scale = 10.0;
  double action_limit = 1.0;
  double position_cost = 0.01;  // c_x
  double action_cost = 0.01;    // c_a
  double start_angle = std::numbers::pi;  // hanging down

  void validate() const {
    if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(half_length > 0.0)) {
      throw InvalidArgument("cartpole: masses and length must be > 0");
    }
    if (!(dt > 0.0)) throw InvalidArgument("cartpole: dt must be > 0");
    if (!(action_limit > 0.0)) {
      throw InvalidArgument("cartpole: action_limit must be > 0");
    }
  }
};

// Cart-pole swing-up with state (x, x_dot, theta, theta_dot); theta = 0 is
// upright and is never wrapped. One explicit Euler step of the classic
// equations of motion per call.
//
// Reward: cos(theta') - position_cost * x'^2 - action_cost * a^2.
class CartPole {
 public:
  CartPole() : CartPole(CartPoleParams{}) {}
  explicit CartPole(const CartPoleParams& params) : p_(params) {
    p_.validate();
  }

  const CartPoleParams& params() const { return p_; }
  int state_dim() const { return 4; }
  int action_dim() const { return 1; }

  Vector initial_state() const { return Vector{{0.0, 0.0, p_.start_angle, 0.0}}; }
  ActionBounds bounds() const {
    return ActionBounds::uniform(1, -p_.action_limit, p_.action_limit);
  }

  struct Accelerations {
    double cart;
    double pole;
  };

  Accelerations accelerations(double theta, double theta_dot,
                              double force) const {
    const double total_mass = p_.cart_mass + p_.pole_mass;
    const double pole_ml = p_.pole_mass * p_.half_length;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const double temp =
        (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
    const double denom =
        p_.half_length *
        (4.0 / 3.0 - p_.pole_mass * cos_t * cos_t / total_mass);
    const double pole_acc = (p_.gravity * sin_t - cos_t * temp) / denom;
    const double cart_acc = temp - pole_ml * pole_acc * cos_t / total_mass;
    return {cart_acc, pole_acc};
  }

  void step(ConstVectorRef s, ConstVectorRef a, VectorRef s_next) const {
    const Accelerations acc = accelerations(s[2], s[3], p_.force_scale * a[0]);
    s_next[0] = s[0] + p_.dt * s[1];
    s_next[1] = s[1] + p_.dt * acc.cart;
    s_next[2] = s[2] + p_.dt * s[3];
    s_next[3] = s[3] + p_.dt * acc.pole;
  }

  void backward(ConstVectorRef s, ConstVectorRef a, ConstVectorRef g,
                VectorRef grad_s, VectorRef grad_a) const {
    const double theta = s[2];
    const double theta_dot = s[3];
    const double force = p_.force_scale * a[0];
    const double total_mass = p_.cart_mass + p_.pole_mass;
    const double pole_ml = p_.pole_mass * p_.half_length;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);

    const double temp =
        (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
    const double dtemp_dtheta =
        pole_ml * theta_dot * theta_dot * cos_t / total_mass;
    const double dtemp_dthetadot =
        2.0 * pole_ml * theta_dot * sin_t / total_mass;
    const double dtemp_dforce = 1.0 / total_mass;

    const double denom =
        p_.half_length *
        (4.0 / 3.0 - p_.pole_mass * cos_t * cos_t / total_mass);
    const double ddenom_dtheta =
        2.0 * p_.half_length * p_.pole_mass * sin_t * cos_t / total_mass;

    const double numer = p_.gravity * sin_t - cos_t * temp;
    const double dnumer_dtheta =
        p_.gravity * cos_t + sin_t * temp - cos_t * dtemp_dtheta;
    const double dnumer_dthetadot = -cos_t * dtemp_dthetadot;
    const double dnumer_dforce = -cos_t * dtemp_dforce;

    const double pole_acc = numer / denom;
    const double dpole_dtheta =
        (dnumer_dtheta * denom - numer * ddenom_dtheta) / (denom * denom);
    const double dpole_dthetadot = dnumer_dthetadot / denom;
    const double dpole_dforce = dnumer_dforce / denom;

    const double c = pole_ml / total_mass;
    const double dcart_dtheta =
        dtemp_dtheta - c * (dpole_dtheta * cos_t - pole_acc * sin_t);
    const double dcart_dthetadot = dtemp_dthetadot - c * cos_t * dpole_dthetadot;
    const double dcart_dforce = dtemp_dforce - c * cos_t * dpole_dforce;

    const double dt = p_.dt;
    grad_s[0] = g[0];
    grad_s[1] = g[1] + dt * g[0];
    grad_s[2] = g[2] + dt * (g[1] * dcart_dtheta + g[3] * dpole_dtheta);
    grad_s[3] = g[3] + dt * g[2] +
                dt * (g[1] * dcart_dthetadot + g[3] * dpole_dthetadot);
    grad_a[0] = dt * p_.force_scale *
                (g[1] * dcart_dforce + g[3] * dpole_dforce);
  }

  double reward(ConstVectorRef s_next, ConstVectorRef a) const {
    return std::cos(s_next[2]) - p_.position_cost * s_next[0] * s_next[0] -
           p_.action_cost * a[0] * a[0];
  }

  void reward_backward(ConstVectorRef s_next, ConstVectorRef a,
                       VectorRef grad_s, VectorRef grad_a) const {
    grad_s[0] = -2.0 * p_.position_cost * s_next[0];
    grad_s[1] = 0.0;
    grad_s[2] = -std::sin(s_next[2]);
    grad_s[3] = 0.0;
    grad_a[0] = -2.0 * p_.action_cost * a[0];
  }

 private:
  CartPoleParams p_;
};

}  // namespace cemgd

#endif  // CEMGD_CARTPOLE_HPP_
