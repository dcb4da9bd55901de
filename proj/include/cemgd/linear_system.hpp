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

#ifndef CEMGD_LINEAR_SYSTEM_HPP_
#define CEMGD_LINEAR_SYSTEM_HPP_

#include <utility>

#include "cemgd/core.hpp"

namespace cemgd {

// s' = A s + B a.
class LinearSystem {
 public:
  LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b)
      : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != a_.cols() || b_.rows() != a_.rows()) {
      throw InvalidArgument("linear system: inconsistent A/B shapes");
    }
  }

  // s' = s + dt * a, the point mass used throughout the tests.
  static LinearSystem point_mass(int dim, double dt) {
    return LinearSystem(Eigen::MatrixXd::Identity(dim, dim),
                        dt * Eigen::MatrixXd::Identity(dim, dim));
  }

  int state_dim() const { return static_cast<int>(a_.rows()); }
  int action_dim() const { return static_cast<int>(b_.cols()); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

  void step(ConstVectorRef s, ConstVectorRef a, VectorRef s_next) const {
    s_next.noalias() = a_ * s + b_ * a;
  }

  void backward(ConstVectorRef, ConstVectorRef, ConstVectorRef g,
                VectorRef grad_s, VectorRef grad_a) const {
    grad_s.noalias() = a_.transpose() * g;
    grad_a.noalias() = b_.transpose() * g;
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
};

// r(s', a) = -(s' - target)^T Q (s' - target) - (a - a_ref)^T R (a - a_ref)
// with diagonal Q and R.
class QuadraticReward {
 public:
  QuadraticReward(Vector state_weight, Vector state_target,
                  Vector action_weight, Vector action_target)
      : q_(std::move(state_weight)),
        s_ref_(std::move(state_target)),
        r_(std::move(action_weight)),
        a_ref_(std::move(action_target)) {}

  double reward(ConstVectorRef s_next, ConstVectorRef a) const {
    const Vector ds = s_next - s_ref_;
    const Vector da = a - a_ref_;
    return -(ds.array().square() * q_.array()).sum() -
           (da.array().square() * r_.array()).sum();
  }

  void reward_backward(ConstVectorRef s_next, ConstVectorRef a,
                       VectorRef grad_s, VectorRef grad_a) const {
    grad_s = -2.0 * (q_.array() * (s_next - s_ref_).array()).matrix();
    grad_a = -2.0 * (r_.array() * (a - a_ref_).array()).matrix();
  }

 private:
  Vector q_;
  Vector s_ref_;
  Vector r_;
  Vector a_ref_;
};

}  // namespace cemgd

#endif  // CEMGD_LINEAR_SYSTEM_HPP_
