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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cemgd/barrier_world.hpp"
#include "cemgd/cartpole.hpp"
#include "cemgd/gradient.hpp"
#include "cemgd/linear_system.hpp"
#include "cemgd/mlp.hpp"
#include "support/oracles.hpp"

namespace cemgd {
namespace {

ActionSequence random_sequence(int horizon, const ActionBounds& b, Rng& rng) {
  ActionSequence seq(horizon, b.dim());
  for (int t = 0; t < horizon; ++t) {
    for (int j = 0; j < b.dim(); ++j) {
      seq(t, j) = std::uniform_real_distribution<double>(b.low[j], b.high[j])(rng);
    }
  }
  return seq;
}

template <class M, class R>
double max_relative_error(const M& model, const R& reward, const Vector& s0,
                          const ActionSequence& seq) {
  const RewardGradient g = reward_gradient(model, reward, s0, seq);
  oracle::Grid x(seq.rows(), std::vector<double>(seq.cols()));
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    for (Eigen::Index j = 0; j < seq.cols(); ++j) x[t][j] = seq(t, j);
  }
  const auto f = [&](const oracle::Grid& grid) {
    ActionSequence a(seq.rows(), seq.cols());
    for (Eigen::Index t = 0; t < a.rows(); ++t) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(t, j) = grid[t][j];
    }
    return evaluate(model, reward, s0, a);
  };
  const oracle::Grid fd = oracle::central_difference(f, x, 1e-6);
  double num = 0.0, scale = 1e-12;
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    for (Eigen::Index j = 0; j < seq.cols(); ++j) {
      num = std::max(num, std::abs(g.grad(t, j) - fd[t][j]));
      scale = std::max({scale, std::abs(fd[t][j]), std::abs(g.grad(t, j))});
    }
  }
  return num / scale;
}

TEST(RewardGradient, MatchesFiniteDifferencesOnBarrier) {
  const BarrierWorld env;
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int probe = 0; probe < 20; ++probe) {
    const Vector s0{{u(rng), u(rng) * 0.5}};
    const ActionSequence seq = random_sequence(10, env.bounds(), rng);
    EXPECT_LT(max_relative_error(env, env, s0, seq), 1e-5) << "probe " << probe;
  }
}

TEST(RewardGradient, MatchesFiniteDifferencesOnCartPole) {
  const CartPole env;
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int probe = 0; probe < 20; ++probe) {
    const Vector s0{{u(rng), u(rng), 3.0 * u(rng), 2.0 * u(rng)}};
    const ActionSequence seq = random_sequence(10, env.bounds(), rng);
    EXPECT_LT(max_relative_error(env, env, s0, seq), 1e-5) << "probe " << probe;
  }
}

TEST(RewardGradient, MatchesFiniteDifferencesThroughAnMlp) {
  const BarrierWorld env;
  Rng rng(3);
  const MlpModel model = MlpModel::random(2, 2, {8, 8}, rng);
  for (int probe = 0; probe < 20; ++probe) {
    const Vector s0{{0.3, -0.2}};
    const ActionSequence seq = random_sequence(8, env.bounds(), rng);
    EXPECT_LT(max_relative_error(model, env, s0, seq), 1e-4) << "probe " << probe;
  }
}

TEST(RewardGradient, ReportsTheForwardReward) {
  const CartPole env;
  Rng rng(4);
  const ActionSequence seq = random_sequence(6, env.bounds(), rng);
  const Vector s0 = env.initial_state();
  EXPECT_EQ(reward_gradient(env, env, s0, seq).reward, evaluate(env, env, s0, seq));
}

TEST(LineSearch, StepSizesShrinkGeometrically) {
  const LinearSystem model = LinearSystem::point_mass(1, 0.1);
  const QuadraticReward reward(Vector::Ones(1), Vector::Zero(1), Vector::Zero(1),
                               Vector::Zero(1));
  const ActionBounds bounds = ActionBounds::uniform(1, -1.0, 1.0);
  const ActionSequence seq = ActionSequence::Constant(3, 1, 0.5);
  const ActionSequence zero = ActionSequence::Zero(3, 1);
  const double r = evaluate(model, reward, Vector::Zero(1), seq);
  std::vector<double> etas;
  const LineSearchConfig cfg;
  const auto res = line_search_update(seq, zero, r, model, reward,
                                      Vector::Zero(1), cfg, bounds, &etas);
  // A zero gradient never strictly improves, so every trial is spent.
  EXPECT_FALSE(res.accepted);
  EXPECT_TRUE(res.sequence == seq);
  const auto want = oracle::step_sizes(0.01, 0.67, 8);
  ASSERT_EQ(etas.size(), want.size());
  for (std::size_t j = 0; j < etas.size(); ++j) EXPECT_DOUBLE_EQ(etas[j], want[j]);
  EXPECT_DOUBLE_EQ(etas[1], 0.0067);
  EXPECT_DOUBLE_EQ(etas[2], 0.004489);
}

TEST(LineSearch, AcceptsTheFirstImprovingCandidate) {
  const LinearSystem model = LinearSystem::point_mass(1, 1.0);
  const QuadraticReward reward(Vector::Ones(1), Vector::Ones(1), Vector::Zero(1),
                               Vector::Zero(1));
  const ActionBounds bounds = ActionBounds::uniform(1, -1.0, 1.0);
  const ActionSequence seq = ActionSequence::Zero(1, 1);
  const RewardGradient g = reward_gradient(model, reward, Vector::Zero(1), seq);
  const auto res = line_search_update(seq, g.grad, g.reward, model, reward,
                                      Vector::Zero(1), LineSearchConfig{}, bounds);
  ASSERT_TRUE(res.accepted);
  EXPECT_EQ(res.record.trials_used, 1);
  EXPECT_DOUBLE_EQ(res.sequence(0, 0), 0.01 * g.grad(0, 0));
}

TEST(LineSearch, ProjectsCandidatesIntoBounds) {
  const LinearSystem model = LinearSystem::point_mass(1, 1.0);
  const QuadraticReward reward(Vector::Ones(1), Vector::Constant(1, 10.0),
                               Vector::Zero(1), Vector::Zero(1));
  const ActionBounds bounds = ActionBounds::uniform(1, -1.0, 1.0);
  const ActionSequence seq = ActionSequence::Constant(2, 1, 0.999);
  const RewardGradient g = reward_gradient(model, reward, Vector::Zero(1), seq);
  const auto res = line_search_update(seq, g.grad, g.reward, model, reward,
                                      Vector::Zero(1), LineSearchConfig{}, bounds);
  ASSERT_TRUE(res.accepted);
  EXPECT_TRUE(bounds.contains(res.sequence));
  EXPECT_EQ(res.sequence.maxCoeff(), 1.0);
}

TEST(Optimize, RewardNeverDecreasesAcrossUpdates) {
  const CartPole cartpole;
  const BarrierWorld barrier;
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const bool use_cartpole = trial % 2 == 0;
    const ActionBounds bounds = use_cartpole ? cartpole.bounds() : barrier.bounds();
    const ActionSequence seq = random_sequence(15, bounds, rng);
    const auto [out, trace] =
        use_cartpole
            ? optimize(seq, cartpole, cartpole, cartpole.initial_state(),
                       LineSearchConfig{}, bounds)
            : optimize(seq, barrier, barrier, barrier.initial_state(),
                       LineSearchConfig{}, bounds);
    ASSERT_EQ(trace.updates.size(), 10u);
    double prev = trace.initial_reward;
    for (const UpdateRecord& u : trace.updates) {
      EXPECT_GE(u.reward_after, prev);
      if (u.accepted) {
        EXPECT_GT(u.reward_after, prev);
      }
      prev = u.reward_after;
    }
    EXPECT_GE(trace.final_reward, trace.initial_reward);
    EXPECT_TRUE(bounds.contains(out));
  }
}

TEST(Optimize, ZeroStepsReturnsTheInputUnchanged) {
  const BarrierWorld env;
  Rng rng(6);
  const ActionSequence seq = random_sequence(5, env.bounds(), rng);
  LineSearchConfig cfg;
  cfg.gradient_steps = 0;
  const auto [out, trace] =
      optimize(seq, env, env, env.initial_state(), cfg, env.bounds());
  EXPECT_TRUE(out == seq);
  EXPECT_EQ(trace.final_reward, trace.initial_reward);
}

TEST(BaselineGradientPlan, IsDeterministicUnderSeed) {
  const BarrierWorld env;
  Rng a(7), b(7);
  const auto x = baseline_gradient_plan(env, env, env.initial_state(), 20,
                                        LineSearchConfig{}, env.bounds(), a);
  const auto y = baseline_gradient_plan(env, env, env.initial_state(), 20,
                                        LineSearchConfig{}, env.bounds(), b);
  EXPECT_TRUE(x.first == y.first);
  EXPECT_EQ(x.second.final_reward, y.second.final_reward);
}

TEST(LineSearchConfig, RejectsInvalidSettings) {
  LineSearchConfig cfg;
  cfg.rho = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.eta_init = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

}  // namespace
}  // namespace cemgd
