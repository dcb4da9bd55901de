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

// Drives the hybrid planner by hand on the barrier world: plan, execute the
// first action, carry the planner state to the next call.

#include <cstdio>

#include "cemgd/barrier_world.hpp"
#include "cemgd/planner.hpp"

int main() {
  const cemgd::BarrierWorld world;
  const cemgd::PlannerConfig config;  // N_init = 15000, N_r = 50, T = 45
  cemgd::Rng rng(7);

  cemgd::PlannerState state;
  cemgd::Vector s = world.initial_state();
  cemgd::Vector next(s.size());
  double episode_reward = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto [out, next_state] =
        cemgd::plan(state, s, world, world, config, world.bounds(), rng);
    state = std::move(next_state);
    world.step(s, out.action, next);
    episode_reward += world.reward(next, out.action);
    s = next;
    if (t % 20 == 0) {
      std::printf("t=%3d  pos=(%+.3f, %+.3f)  samples=%d  model_reward=%.3f\n", t,
                  s[0], s[1], out.diagnostics.samples_used, out.model_reward);
    }
  }
  std::printf("final pos=(%+.3f, %+.3f)  episode reward %.3f\n", s[0], s[1],
              episode_reward);
  return 0;
}
