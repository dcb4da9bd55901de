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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cemgd/harness/csv.hpp"
#include "cemgd/harness/experiments.hpp"
#include "support/oracles.hpp"

namespace cemgd::harness {
namespace {

PlannerConfig quick_config() {
  PlannerConfig cfg;
  cfg.horizon = 10;
  cfg.initial = {50, 3};
  return cfg;
}

ExperimentSpec quick_spec(const std::string& env, PlannerSpec planner,
                          int length = 5, int seeds = 2) {
  ExperimentSpec spec;
  spec.env.name = env;
  spec.planner = std::move(planner);
  spec.episode_length = length;
  spec.seeds = seed_range(0, seeds);
  return spec;
}

CsvTable parse(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

TEST(Episode, SingleStepEpisodeHasOneRecord) {
  const ExperimentSpec spec = quick_spec("barrier", PlannerSpec::cem_gd(quick_config()), 1, 1);
  const EpisodeResult ep = run_episode(spec, 0);
  ASSERT_TRUE(ep.ok());
  ASSERT_EQ(ep.steps.size(), 1u);
  EXPECT_EQ(ep.states.rows(), 2);
  EXPECT_EQ(ep.episode_reward, ep.steps[0].true_reward);
  EXPECT_EQ(ep.steps[0].samples_used, 150);
}

TEST(BarrierOutcome, ClassifiesSyntheticRoutes) {
  const BarrierParams p;
  RowMatrix below(3, 2);
  below << -1.0, 0.0, 0.0, -0.6, 1.0, 0.0;
  const BarrierOutcome b = barrier_outcome(p, below, 0.1);
  EXPECT_TRUE(b.went_below);
  EXPECT_FALSE(b.went_above);
  EXPECT_TRUE(b.reached_goal);
  EXPECT_TRUE(b.success());

  RowMatrix above(3, 2);
  above << -1.0, 0.0, 0.0, 0.6, 1.0, 0.0;
  const BarrierOutcome a = barrier_outcome(p, above, 0.1);
  EXPECT_FALSE(a.went_below);
  EXPECT_TRUE(a.went_above);
  EXPECT_FALSE(a.success());

  RowMatrix short_of_goal(2, 2);
  short_of_goal << -1.0, -0.5, -0.5, -0.5;
  const BarrierOutcome s = barrier_outcome(p, short_of_goal, 0.1);
  EXPECT_FALSE(s.reached_goal);
  EXPECT_FALSE(s.went_above);
  EXPECT_FALSE(s.success());
}

TEST(Episode, SameSeedSameEpisode) {
  for (const std::string env : {"barrier", "cartpole"}) {
    const ExperimentSpec spec = quick_spec(env, PlannerSpec::cem_gd(quick_config()));
    const EpisodeResult a = run_episode(spec, 3);
    const EpisodeResult b = run_episode(spec, 3);
    EXPECT_TRUE(a.states == b.states) << env;
    EXPECT_EQ(a.episode_reward, b.episode_reward) << env;
  }
}

TEST(RunGrid, ThreadCountDoesNotChangeResults) {
  const std::vector<ExperimentSpec> specs = {
      quick_spec("barrier", PlannerSpec::cem(50, quick_config()), 4, 3),
      quick_spec("cartpole", PlannerSpec::gradient(quick_config()), 4, 3)};
  const auto serial = run_grid(specs, 1);
  const auto threaded = run_grid(specs, 4);
  ASSERT_EQ(serial.size(), 6u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_TRUE(serial[i].states == threaded[i].states);
    EXPECT_EQ(serial[i].planner_id, threaded[i].planner_id);
  }
}

TEST(NinitSweep, SingleTrialFractionsAreZeroOrOne) {
  ExperimentSpec base = quick_spec("barrier", PlannerSpec::cem_gd(quick_config()), 5, 1);
  const NinitSweep sweep = ninit_sweep(base, {50, 500}, 1, 0, 1);
  ASSERT_EQ(sweep.table.size(), 2u);
  for (const NinitRow& row : sweep.table) {
    EXPECT_TRUE(row.fraction == 0.0 || row.fraction == 1.0);
    EXPECT_EQ(row.trials, 1);
  }

  // The table can be rebuilt from the per-episode file.
  std::ostringstream os;
  write_episodes_csv(os, sweep.episodes);
  const CsvTable t = parse(os.str());
  const int planner = t.column("planner");
  const int success = t.column("success");
  for (const NinitRow& row : sweep.table) {
    int hits = 0;
    for (const auto& r : t.rows) {
      if (r[planner] == "cem-gd-ninit-" + std::to_string(row.n_init)) {
        hits += r[success] == "1";
      }
    }
    EXPECT_EQ(hits, row.successes);
  }
}

TEST(NinitSweep, RequiresTheBarrierWorld) {
  const ExperimentSpec base = quick_spec("cartpole", PlannerSpec::cem_gd(quick_config()));
  EXPECT_THROW(ninit_sweep(base, {50}, 1), InvalidArgument);
}

TEST(Summary, MeanRewardMatchesTheRawCsv) {
  const std::vector<ExperimentSpec> specs = {
      quick_spec("cartpole", PlannerSpec::cem(50, quick_config()), 6, 3)};
  const auto episodes = run_grid(specs, 1);
  const auto summary = summarize(episodes);
  ASSERT_EQ(summary.size(), 1u);

  std::ostringstream os;
  write_raw_csv(os, episodes);
  const CsvTable raw = parse(os.str());
  const int seed_col = raw.column("seed");
  const int reward_col = raw.column("true_reward");
  std::vector<double> totals(3, 0.0);
  for (const auto& r : raw.rows) {
    totals[std::stoul(r[seed_col])] += std::stod(r[reward_col]);
  }
  EXPECT_DOUBLE_EQ(summary[0].mean_reward, oracle::mean(totals));
  EXPECT_DOUBLE_EQ(summary[0].std_reward, oracle::population_std(totals));
  EXPECT_EQ(summary[0].n_seeds, 3);
  EXPECT_EQ(summary[0].mean_samples_per_step, 50.0);
  EXPECT_EQ(summary[0].mean_memory_proxy, 10.0);
}

TEST(Summary, SingleSeedHasZeroSpread) {
  const auto episodes =
      run_grid({quick_spec("barrier", PlannerSpec::cem(50, quick_config()), 3, 1)}, 1);
  const auto summary = summarize(episodes);
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].std_reward, 0.0);
  EXPECT_FALSE(std::isnan(summary[0].success_rate));
}

TEST(Summary, FailedEpisodesAreCountedButExcluded) {
  EpisodeResult ok;
  ok.env_id = "cartpole";
  ok.planner_id = "cem-50";
  ok.episode_reward = 4.0;
  ok.steps.push_back({1.0, 1.0, 50, 0, 10, 0.01});
  EpisodeResult failed = ok;
  failed.error = "diverged";
  failed.episode_reward = -1e9;
  const auto rows = summarize({ok, failed});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n_seeds, 1);
  EXPECT_EQ(rows[0].n_failed, 1);
  EXPECT_EQ(rows[0].mean_reward, 4.0);

  std::ostringstream os;
  write_episodes_csv(os, {failed});
  EXPECT_NE(os.str().find("failed at step"), std::string::npos);
}

TEST(Compare, EmptyPlannerListGivesEmptyTables) {
  EnvironmentSpec env;
  const Comparison c = compare_planners({env}, {}, seed_range(0, 2), 5);
  EXPECT_TRUE(c.episodes.empty());
  EXPECT_TRUE(c.summary.empty());
  std::ostringstream os;
  write_summary_csv(os, c.summary);
  const CsvTable t = parse(os.str());
  EXPECT_EQ(t.header, summary_columns());
  EXPECT_TRUE(t.rows.empty());
}

TEST(Compare, LargerBudgetTakesLongerPerStep) {
  EnvironmentSpec env;
  env.name = "cartpole";
  PlannerConfig cfg;
  cfg.horizon = 20;
  const Comparison c = compare_planners(
      {env}, {PlannerSpec::cem(50, cfg), PlannerSpec::cem(5000, cfg)},
      seed_range(0, 1), 3, {}, 1);
  ASSERT_EQ(c.summary.size(), 2u);
  EXPECT_LT(c.summary[0].mean_plan_seconds, c.summary[1].mean_plan_seconds);
  EXPECT_LT(c.summary[0].mean_memory_proxy, c.summary[1].mean_memory_proxy);
}

TEST(SampleSweep, ProducesOneRowPerPlannerAndBudget) {
  ExperimentSpec base = quick_spec("cartpole", PlannerSpec::cem_gd(quick_config()), 3, 1);
  const SampleSweep sweep = sample_efficiency_sweep(
      base, {PlannerKind::kCem, PlannerKind::kCemGd}, {50, 500}, 2, 0, 1);
  ASSERT_EQ(sweep.table.size(), 4u);
  EXPECT_EQ(sweep.table[0].planner, "cem");
  EXPECT_EQ(sweep.table[1].budget, 500);
  EXPECT_EQ(sweep.table[2].planner, "cem-gd");
  EXPECT_EQ(sweep.episodes.size(), 8u);
  EXPECT_THROW(sample_efficiency_sweep(base, {PlannerKind::kGradient}, {50}, 1),
               InvalidArgument);
}

TEST(Csv, FormatsAndSanitizesFields) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::nan("")), "");
  EXPECT_EQ(sanitize_field("a,b\nc"), "a;b;c");
  EXPECT_EQ(split_csv_line("a,,b,"), (std::vector<std::string>{"a", "", "b", ""}));
}

TEST(Csv, RaggedRowsAreRejected) {
  EXPECT_THROW(parse("a,b\n1,2,3\n"), InvalidArgument);
  EXPECT_THROW(parse("a,b\n1,2\n").column("c"), InvalidArgument);
}

TEST(BarrierWorld, GradientBaselineSometimesEndsAboveTheBarrier) {
  ExperimentSpec spec;
  spec.planner = PlannerSpec::gradient();
  spec.seeds = seed_range(0, 100);
  int above = 0;
  for (const EpisodeResult& ep : run_grid({spec})) {
    ASSERT_TRUE(ep.ok()) << ep.error;
    above += ep.barrier->went_above;
  }
  EXPECT_GT(above, 0);
  EXPECT_LT(above, 100);
}

TEST(Environments, UnknownNameListsTheValidOnes) {
  EnvironmentSpec env;
  env.name = "pendulum";
  try {
    env.validate();
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("barrier, cartpole"), std::string::npos);
  }
}

}  // namespace
}  // namespace cemgd::harness
