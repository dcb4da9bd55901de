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

#ifndef CEMGD_HARNESS_EXPERIMENTS_HPP_
#define CEMGD_HARNESS_EXPERIMENTS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cemgd/barrier_world.hpp"
#include "cemgd/cartpole.hpp"
#include "cemgd/harness/episode.hpp"
#include "cemgd/mlp.hpp"
#include "cemgd/mlp_io.hpp"

namespace cemgd::harness {

inline const std::vector<std::string>& valid_environments() {
  static const std::vector<std::string> names = {"barrier", "cartpole"};
  return names;
}

inline std::string join(const std::vector<std::string>& items,
                        const std::string& sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

struct EnvironmentSpec {
  std::string name = "barrier";
  BarrierParams barrier;
  CartPoleParams cartpole;

  void validate() const {
    const auto& names = valid_environments();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw InvalidArgument("unknown environment '" + name +
                            "'; valid environments: " + join(names));
    }
    barrier.validate();
    cartpole.validate();
  }
};

enum class ModelSource { kAnalytic, kMlp };

struct ModelSpec {
  ModelSource source = ModelSource::kAnalytic;
  std::string path;  // MLP weight file when source == kMlp
};

struct ExperimentSpec {
  EnvironmentSpec env;
  PlannerSpec planner;
  int episode_length = 100;
  std::vector<std::uint64_t> seeds;
  ModelSpec model;
  double goal_tolerance = 0.1;

  void validate() const {
    env.validate();
    planner.config.validate();
    if (episode_length < 1) throw InvalidArgument("episode_length must be >= 1");
    if (seeds.empty()) throw InvalidArgument("seed list must be nonempty");
  }
};

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
  return seeds;
}

// Loads each MLP file once; the models are immutable and shared.
class ModelCache {
 public:
  const MlpModel& get(const std::string& path) {
    auto it = models_.find(path);
    if (it == models_.end()) {
      it = models_.emplace(path, std::make_shared<MlpModel>(load_mlp(path))).first;
    }
    return *it->second;
  }

 private:
  std::map<std::string, std::shared_ptr<const MlpModel>> models_;
};

namespace detail {

template <class Env>
EpisodeResult run_with_env(const Env& env, const ExperimentSpec& spec,
                           std::uint64_t seed, const MlpModel* mlp) {
  if (mlp != nullptr) {
    if (mlp->state_dim() != env.state_dim() ||
        mlp->action_dim() != env.action_dim()) {
      throw InvalidArgument("model dimensions do not match environment '" +
                            spec.env.name + "'");
    }
    return run_episode(env, *mlp, env, spec.planner, spec.episode_length, seed,
                       spec.env.name);
  }
  return run_episode(env, env, env, spec.planner, spec.episode_length, seed,
                     spec.env.name);
}

}  // namespace detail

// One seeded episode of `spec`. `mlp` must be provided when the spec's model
// source is an MLP file.
inline EpisodeResult run_episode(const ExperimentSpec& spec, std::uint64_t seed,
                                 const MlpModel* mlp = nullptr) {
  spec.env.validate();
  if (spec.model.source == ModelSource::kMlp && mlp == nullptr) {
    throw InvalidArgument("experiment uses an MLP model but none was loaded");
  }
  const MlpModel* model = spec.model.source == ModelSource::kMlp ? mlp : nullptr;
  if (spec.env.name == "barrier") {
    const BarrierWorld env(spec.env.barrier);
    EpisodeResult r = detail::run_with_env(env, spec, seed, model);
    r.barrier = barrier_outcome(spec.env.barrier, r.states, spec.goal_tolerance);
    return r;
  }
  const CartPole env(spec.env.cartpole);
  return detail::run_with_env(env, spec, seed, model);
}

inline int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written by index so the outcome is independent of scheduling.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Every (spec, seed) pair, in spec order then seed order.
inline std::vector<EpisodeResult> run_grid(const std::vector<ExperimentSpec>& specs,
                                           int threads = default_threads()) {
  std::vector<std::pair<const ExperimentSpec*, std::uint64_t>> jobs;
  ModelCache cache;
  std::vector<const MlpModel*> models;
  for (const ExperimentSpec& spec : specs) {
    spec.validate();
    const MlpModel* mlp =
        spec.model.source == ModelSource::kMlp ? &cache.get(spec.model.path) : nullptr;
    for (std::uint64_t seed : spec.seeds) {
      jobs.emplace_back(&spec, seed);
      models.push_back(mlp);
    }
  }
  std::vector<EpisodeResult> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int i) {
    try {
      results[i] = run_episode(*jobs[i].first, jobs[i].second, models[i]);
    } catch (const Error& e) {
      EpisodeResult& r = results[i];
      r.env_id = jobs[i].first->env.name;
      r.planner_id = jobs[i].first->planner.id;
      r.seed = jobs[i].second;
      r.error = e.what();
      r.failed_step = 0;
    }
  });
  return results;
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Population standard deviation (zero for a single value).
inline double std_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

struct SummaryRow {
  std::string env;
  std::string planner;
  int n_seeds = 0;   // completed episodes
  int n_failed = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double success_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_samples_per_step = 0.0;
  double mean_gradient_rollouts_per_step = 0.0;
  double mean_memory_proxy = 0.0;
  double mean_plan_seconds = 0.0;
};

// Groups by (env, planner) in order of first appearance; failed episodes are
// counted but excluded from the statistics.
inline std::vector<SummaryRow> summarize(const std::vector<EpisodeResult>& episodes) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<const EpisodeResult*>> groups;
  for (const EpisodeResult& ep : episodes) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) {
      return r.env == ep.env_id && r.planner == ep.planner_id;
    });
    if (it == rows.end()) {
      rows.push_back({ep.env_id, ep.planner_id});
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[it - rows.begin()].push_back(&ep);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    SummaryRow& row = rows[g];
    std::vector<double> rewards, samples, grads, memory, times, success;
    for (const EpisodeResult* ep : groups[g]) {
      if (!ep->ok()) {
        ++row.n_failed;
        continue;
      }
      rewards.push_back(ep->episode_reward);
      if (ep->barrier) success.push_back(ep->barrier->success() ? 1.0 : 0.0);
      for (const StepRecord& s : ep->steps) {
        samples.push_back(s.samples_used);
        grads.push_back(s.gradient_rollouts);
        memory.push_back(s.memory_proxy);
        times.push_back(s.plan_seconds);
      }
    }
    row.n_seeds = static_cast<int>(rewards.size());
    row.mean_reward = mean_of(rewards);
    row.std_reward = std_of(rewards);
    if (!success.empty()) row.success_rate = mean_of(success);
    row.mean_samples_per_step = mean_of(samples);
    row.mean_gradient_rollouts_per_step = mean_of(grads);
    row.mean_memory_proxy = mean_of(memory);
    row.mean_plan_seconds = mean_of(times);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Barrier-world N_init sweep.

struct NinitRow {
  int n_init = 0;
  int trials = 0;
  int successes = 0;
  double fraction = 0.0;
};

struct NinitSweep {
  std::vector<NinitRow> table;
  std::vector<EpisodeResult> episodes;
};

// `base` must describe the barrier world and a CEM-GD planner; its
// planner.config.replan split is kept fixed while N_init varies.
inline NinitSweep ninit_sweep(const ExperimentSpec& base,
                              const std::vector<int>& n_init_values, int trials,
                              std::uint64_t first_seed = 0,
                              int threads = default_threads()) {
  if (trials < 1) throw InvalidArgument("ninit_sweep: trials must be >= 1");
  if (base.env.name != "barrier") {
    throw InvalidArgument("ninit_sweep: requires the barrier environment");
  }
  std::vector<ExperimentSpec> specs;
  for (int n_init : n_init_values) {
    ExperimentSpec spec = base;
    spec.planner.kind = PlannerKind::kCemGd;
    spec.planner.config.initial = default_split(n_init);
    spec.planner.id = "cem-gd-ninit-" + std::to_string(n_init);
    spec.seeds = seed_range(first_seed, trials);
    specs.push_back(std::move(spec));
  }
  NinitSweep out;
  out.episodes = run_grid(specs, threads);
  for (std::size_t v = 0; v < n_init_values.size(); ++v) {
    NinitRow row;
    row.n_init = n_init_values[v];
    row.trials = trials;
    for (int t = 0; t < trials; ++t) {
      const EpisodeResult& ep = out.episodes[v * trials + t];
      if (ep.ok() && ep.barrier && ep.barrier->success()) ++row.successes;
    }
    row.fraction = static_cast<double>(row.successes) / trials;
    out.table.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample-efficiency sweep: CEM budget N = n*m; CEM-GD budget N_r.

struct SampleRow {
  std::string planner;  // "cem" or "cem-gd"
  int budget = 0;
  int n_seeds = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
};

struct SampleSweep {
  std::vector<SampleRow> table;
  std::vector<EpisodeResult> episodes;
};

inline PlannerSpec planner_for_budget(PlannerKind kind, int budget,
                                      const PlannerConfig& base) {
  switch (kind) {
    case PlannerKind::kCem:
      return PlannerSpec::cem(budget, base);
    case PlannerKind::kCemGd: {
      PlannerSpec spec = PlannerSpec::cem_gd(base);
      spec.config.replan = default_split(budget);
      spec.id = "cem-gd-" + std::to_string(budget);
      return spec;
    }
    case PlannerKind::kGradient:
      break;
  }
  throw InvalidArgument("sample sweep supports planners 'cem' and 'cem-gd'");
}

inline SampleSweep sample_efficiency_sweep(const ExperimentSpec& base,
                                           const std::vector<PlannerKind>& planners,
                                           const std::vector<int>& budgets,
                                           int trials, std::uint64_t first_seed = 0,
                                           int threads = default_threads()) {
  if (trials < 1) throw InvalidArgument("sample sweep: trials must be >= 1");
  std::vector<ExperimentSpec> specs;
  std::vector<std::pair<PlannerKind, int>> keys;
  for (PlannerKind kind : planners) {
    for (int budget : budgets) {
      ExperimentSpec spec = base;
      spec.planner = planner_for_budget(kind, budget, base.planner.config);
      spec.seeds = seed_range(first_seed, trials);
      specs.push_back(std::move(spec));
      keys.emplace_back(kind, budget);
    }
  }
  SampleSweep out;
  if (specs.empty()) return out;
  out.episodes = run_grid(specs, threads);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::vector<double> rewards;
    for (int t = 0; t < trials; ++t) {
      const EpisodeResult& ep = out.episodes[k * trials + t];
      if (ep.ok()) rewards.push_back(ep.episode_reward);
    }
    out.table.push_back({to_string(keys[k].first), keys[k].second,
                         static_cast<int>(rewards.size()), mean_of(rewards),
                         std_of(rewards)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planner comparison.

// CEM-50, CEM-500, CEM-5000, the gradient baseline and CEM-GD.
inline std::vector<PlannerSpec> reference_planners(const PlannerConfig& base) {
  return {PlannerSpec::cem(50, base), PlannerSpec::cem(500, base),
          PlannerSpec::cem(5000, base), PlannerSpec::gradient(base),
          PlannerSpec::cem_gd(base)};
}

struct Comparison {
  std::vector<EpisodeResult> episodes;
  std::vector<SummaryRow> summary;
};

inline Comparison compare_planners(const std::vector<EnvironmentSpec>& envs,
                                   const std::vector<PlannerSpec>& planners,
                                   const std::vector<std::uint64_t>& seeds,
                                   int episode_length, const ModelSpec& model = {},
                                   int threads = default_threads()) {
  std::vector<ExperimentSpec> specs;
  for (const EnvironmentSpec& env : envs) {
    for (const PlannerSpec& planner : planners) {
      ExperimentSpec spec;
      spec.env = env;
      spec.planner = planner;
      spec.episode_length = episode_length;
      spec.seeds = seeds;
      spec.model = model;
      specs.push_back(std::move(spec));
    }
  }
  Comparison out;
  out.episodes = run_grid(specs, threads);
  out.summary = summarize(out.episodes);
  return out;
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_EXPERIMENTS_HPP_
