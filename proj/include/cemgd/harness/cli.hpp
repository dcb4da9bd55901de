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

// Command-line front end. Requires CLI11 on the include path (the
// cemgd::cli CMake target provides it).

#ifndef CEMGD_HARNESS_CLI_HPP_
#define CEMGD_HARNESS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cemgd/harness/config.hpp"
#include "cemgd/harness/csv.hpp"
#include "cemgd/harness/experiments.hpp"
#include "cemgd/harness/gradcheck.hpp"
#include "cemgd/mlp.hpp"
#include "cemgd/mlp_io.hpp"

namespace cemgd::harness {

namespace cli {

// Flags shared by every subcommand.
struct CommonFlags {
  std::string config = "paper_defaults";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

inline void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config,
                  "JSON config file or built-in name (paper_defaults, smoke)");
  cmd->add_option("--seed", f.seed, "first seed (overrides config first_seed)");
  cmd->add_option("--out", f.out,
                  "output directory (default: $CEMGD_OUT_DIR or ./results)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

inline RunConfig resolve(const CommonFlags& f) {
  RunConfig c = load_config(f.config);
  if (f.seed) c.first_seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

inline void write_episode_files(const std::filesystem::path& dir,
                                const std::vector<EpisodeResult>& episodes,
                                std::ostream& out) {
  write_csv_file(dir, "raw.csv",
                 [&](std::ostream& os) { write_raw_csv(os, episodes); });
  write_csv_file(dir, "episodes.csv",
                 [&](std::ostream& os) { write_episodes_csv(os, episodes); });
  const auto summary = summarize(episodes);
  write_csv_file(dir, "summary.csv",
                 [&](std::ostream& os) { write_summary_csv(os, summary); });
  for (const SummaryRow& r : summary) {
    out << r.env << " " << r.planner << ": mean " << format_double(r.mean_reward)
        << " std " << format_double(r.std_reward) << " over " << r.n_seeds
        << " seeds";
    if (r.n_failed) out << " (" << r.n_failed << " failed)";
    if (!std::isnan(r.success_rate)) {
      out << ", success " << format_double(r.success_rate);
    }
    out << "\n";
  }
  out << "wrote " << (dir / "raw.csv").string() << ", "
      << (dir / "episodes.csv").string() << ", "
      << (dir / "summary.csv").string() << "\n";
}

inline std::vector<EpisodeResult> failed_only(const std::vector<EpisodeResult>& eps) {
  std::vector<EpisodeResult> out;
  for (const auto& e : eps) {
    if (!e.ok()) out.push_back(e);
  }
  return out;
}

}  // namespace cli

// Entry point of the cemgd tool. Returns the process exit code: 0 on
// success, 1 on a runtime or configuration error, 2 on a usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"CEM-GD trajectory planner experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for all subcommands");

  cli::CommonFlags run_flags, ninit_flags, samples_flags, compare_flags,
      train_flags, grad_flags;

  std::string run_env, run_planner, run_model;
  CLI::App* run = app.add_subcommand("run", "run one planner on one environment");
  cli::add_common(run, run_flags);
  run->add_option("--env", run_env, "environment (default: first configured)");
  run->add_option("--planner", run_planner, "cem-gd, gradient or cem-<budget>");
  run->add_option("--model", run_model, "plan with an MLP weight file");

  std::optional<int> ninit_trials;
  std::vector<int> ninit_values;
  CLI::App* ninit = app.add_subcommand("sweep-ninit", "barrier-world N_init sweep");
  cli::add_common(ninit, ninit_flags);
  ninit->add_option("--trials", ninit_trials, "episodes per N_init value");
  ninit->add_option("--values", ninit_values, "N_init values");

  std::string samples_env = "cartpole";
  std::optional<int> samples_trials;
  std::vector<int> samples_budgets;
  CLI::App* samples =
      app.add_subcommand("sweep-samples", "sample-efficiency sweep (CEM vs CEM-GD)");
  cli::add_common(samples, samples_flags);
  samples->add_option("--env", samples_env, "environment");
  samples->add_option("--trials", samples_trials, "episodes per budget");
  samples->add_option("--budgets", samples_budgets, "sample budgets");

  std::string compare_model;
  CLI::App* compare =
      app.add_subcommand("compare", "all reference planners on all environments");
  cli::add_common(compare, compare_flags);
  compare->add_option("--model", compare_model, "plan with an MLP weight file");

  std::string train_env = "cartpole";
  CLI::App* train =
      app.add_subcommand("train-model", "fit an MLP on random rollouts and save it");
  cli::add_common(train, train_flags);
  train->add_option("--env", train_env, "environment");

  std::string grad_env = "all";
  std::optional<int> grad_probes;
  CLI::App* grad =
      app.add_subcommand("gradcheck", "finite-difference check of reward gradients");
  cli::add_common(grad, grad_flags);
  grad->add_option("--env", grad_env, "barrier, cartpole, mlp or all");
  grad->add_option("--probes", grad_probes, "random probes per target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run) {
      RunConfig c = cli::resolve(run_flags);
      ExperimentSpec spec;
      spec.env = c.environment(run_env.empty() ? c.environments.front() : run_env);
      spec.planner =
          parse_planner(run_planner.empty() ? c.planner : run_planner, c.planner_config);
      spec.episode_length = c.episode_length;
      spec.seeds = c.seeds();
      spec.model = c.model;
      if (!run_model.empty()) spec.model = {ModelSource::kMlp, run_model};
      spec.goal_tolerance = c.goal_tolerance;
      const auto episodes = run_grid({spec}, c.worker_threads());
      cli::write_episode_files(resolve_out_dir(run_flags.out), episodes, out);
    } else if (*ninit) {
      RunConfig c = cli::resolve(ninit_flags);
      if (ninit_trials) c.ninit_sweep.trials = *ninit_trials;
      if (!ninit_values.empty()) c.ninit_sweep.values = ninit_values;
      c.validate();
      ExperimentSpec base;
      base.env = c.environment("barrier");
      base.planner = PlannerSpec::cem_gd(c.planner_config);
      base.episode_length = c.episode_length;
      base.seeds = c.seeds();
      base.model = c.model;
      base.goal_tolerance = c.goal_tolerance;
      const NinitSweep sweep =
          ninit_sweep(base, c.ninit_sweep.values, c.ninit_sweep.trials,
                      c.first_seed, c.worker_threads());
      const auto dir = resolve_out_dir(ninit_flags.out);
      write_csv_file(dir, "ninit.csv",
                     [&](std::ostream& os) { write_ninit_csv(os, sweep.table); });
      for (const NinitRow& r : sweep.table) {
        out << "N_init " << r.n_init << ": " << r.successes << "/" << r.trials
            << " below-and-reached\n";
      }
      cli::write_episode_files(dir, sweep.episodes, out);
    } else if (*samples) {
      RunConfig c = cli::resolve(samples_flags);
      if (samples_trials) c.sample_sweep.trials = *samples_trials;
      if (!samples_budgets.empty()) c.sample_sweep.budgets = samples_budgets;
      c.validate();
      ExperimentSpec base;
      base.env = c.environment(samples_env);
      base.planner = PlannerSpec::cem_gd(c.planner_config);
      base.episode_length = c.episode_length;
      base.seeds = c.seeds();
      base.model = c.model;
      base.goal_tolerance = c.goal_tolerance;
      std::vector<PlannerKind> kinds;
      for (const auto& p : c.sample_sweep.planners) kinds.push_back(parse_planner_kind(p));
      const SampleSweep sweep =
          sample_efficiency_sweep(base, kinds, c.sample_sweep.budgets,
                                  c.sample_sweep.trials, c.first_seed,
                                  c.worker_threads());
      const auto dir = resolve_out_dir(samples_flags.out);
      write_csv_file(dir, "samples.csv",
                     [&](std::ostream& os) { write_samples_csv(os, sweep.table); });
      for (const SampleRow& r : sweep.table) {
        out << r.planner << " budget " << r.budget << ": mean "
            << format_double(r.mean_reward) << " std " << format_double(r.std_reward)
            << "\n";
      }
      cli::write_episode_files(dir, sweep.episodes, out);
    } else if (*compare) {
      RunConfig c = cli::resolve(compare_flags);
      std::vector<EnvironmentSpec> envs;
      for (const auto& name : c.environments) envs.push_back(c.environment(name));
      std::vector<PlannerSpec> planners;
      for (const auto& p : c.compare_planners) {
        planners.push_back(parse_planner(p, c.planner_config));
      }
      ModelSpec model = c.model;
      if (!compare_model.empty()) model = {ModelSource::kMlp, compare_model};
      const Comparison cmp = compare_planners(envs, planners, c.seeds(),
                                              c.episode_length, model,
                                              c.worker_threads());
      cli::write_episode_files(resolve_out_dir(compare_flags.out), cmp.episodes, out);
    } else if (*train) {
      RunConfig c = cli::resolve(train_flags);
      const EnvironmentSpec env = c.environment(train_env);
      Rng rng(c.first_seed);
      std::vector<Transition> data;
      if (env.name == "barrier") {
        const BarrierWorld world(env.barrier);
        data = collect_random_transitions(world, world.initial_state(), world.bounds(),
                                          c.train.rollouts, c.train.rollout_length, rng);
      } else {
        const CartPole world(env.cartpole);
        data = collect_random_transitions(world, world.initial_state(), world.bounds(),
                                          c.train.rollouts, c.train.rollout_length, rng);
      }
      FitOptions fit = c.train.fit;
      fit.seed = c.first_seed;
      FitReport report;
      const MlpModel model = fit_mlp(data, fit, &report);
      const auto dir = resolve_out_dir(train_flags.out);
      std::filesystem::create_directories(dir);
      const std::filesystem::path stem =
          dir / std::filesystem::path(c.train.output).stem();
      std::filesystem::path bin = stem, json = stem;
      bin += ".bin";
      json += ".json";
      save_mlp(model, bin);
      save_mlp(model, json);
      write_csv_file(dir, "train.csv", [&](std::ostream& os) {
        os << "epoch,mse\n0," << format_double(report.initial_mse) << "\n";
        for (std::size_t e = 0; e < report.epoch_mse.size(); ++e) {
          os << e + 1 << "," << format_double(report.epoch_mse[e]) << "\n";
        }
      });
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      out << "trained on " << data.size() << " transitions: mse "
          << format_double(report.initial_mse) << " -> "
          << format_double(report.final_mse) << "\n";
      out << "wrote " << bin.string() << ", " << json.string() << "\n";
    } else if (*grad) {
      RunConfig c = cli::resolve(grad_flags);
      if (grad_probes) c.gradcheck.probes = *grad_probes;
      c.validate();
      std::vector<std::string> targets;
      if (grad_env == "all") {
        targets = gradcheck_targets();
      } else {
        targets = {grad_env};
      }
      bool ok = true;
      for (const auto& t : targets) {
        const GradcheckReport rep =
            run_gradcheck(t, c.barrier, c.cartpole, c.gradcheck.probes,
                          c.gradcheck.horizon, c.gradcheck.step, c.first_seed);
        out << t << ": max relative error " << format_double(rep.max_relative_error)
            << " over " << rep.probes << " probes (tolerance "
            << format_double(rep.tolerance) << ") "
            << (rep.passed() ? "ok" : "FAILED") << "\n";
        ok = ok && rep.passed();
      }
      if (!ok) {
        err << "cemgd: error: gradient check exceeded tolerance\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    err << "cemgd: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_CLI_HPP_
