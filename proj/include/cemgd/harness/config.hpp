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

#ifndef CEMGD_HARNESS_CONFIG_HPP_
#define CEMGD_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cemgd/barrier_world.hpp"
#include "cemgd/cartpole.hpp"
#include "cemgd/harness/experiments.hpp"
#include "cemgd/mlp.hpp"
#include "cemgd/planner_config.hpp"

namespace cemgd::harness {

inline constexpr int kConfigVersion = 1;

struct NinitSweepConfig {
  std::vector<int> values = {50, 500, 5000};
  int trials = 20;
};

struct SampleSweepConfig {
  std::vector<std::string> planners = {"cem", "cem-gd"};
  std::vector<int> budgets = {50, 500, 5000};
  int trials = 20;
};

struct TrainConfig {
  int rollouts = 500;
  int rollout_length = 200;
  FitOptions fit;
  std::string output = "model.bin";
};

struct GradcheckConfig {
  int probes = 50;
  int horizon = 10;
  double step = 1e-6;  // central-difference half width
};

// Everything a CLI invocation can be configured with. Each subcommand reads
// the parts it needs.
struct RunConfig {
  std::vector<std::string> environments = {"barrier", "cartpole"};
  BarrierParams barrier;
  CartPoleParams cartpole;
  std::string planner = "cem-gd";
  PlannerConfig planner_config;
  int episode_length = 100;
  int num_seeds = 20;
  std::uint64_t first_seed = 0;
  ModelSpec model;
  double goal_tolerance = 0.1;
  int threads = 0;  // 0 selects the hardware concurrency
  NinitSweepConfig ninit_sweep;
  SampleSweepConfig sample_sweep;
  std::vector<std::string> compare_planners = {"cem-50", "cem-500", "cem-5000",
                                               "gradient", "cem-gd"};
  TrainConfig train;
  GradcheckConfig gradcheck;

  std::vector<std::uint64_t> seeds() const {
    return seed_range(first_seed, num_seeds);
  }
  int worker_threads() const { return threads > 0 ? threads : default_threads(); }

  EnvironmentSpec environment(const std::string& name) const {
    EnvironmentSpec env{name, barrier, cartpole};
    env.validate();
    return env;
  }

  void validate() const;
};

// "cem-gd", "gradient" or "cem-<budget>".
inline PlannerSpec parse_planner(const std::string& name,
                                 const PlannerConfig& config) {
  if (name == "cem-gd") return PlannerSpec::cem_gd(config);
  if (name == "gradient") return PlannerSpec::gradient(config);
  const std::string prefix = "cem-";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
    const std::string digits = name.substr(prefix.size());
    if (digits.find_first_not_of("0123456789") == std::string::npos &&
        digits.size() < 10) {
      const int budget = std::stoi(digits);
      if (budget > 0) return PlannerSpec::cem(budget, config);
    }
  }
  throw InvalidArgument("unknown planner '" + name +
                        "'; expected cem-gd, gradient or cem-<budget>");
}

inline PlannerKind parse_planner_kind(const std::string& name) {
  if (name == "cem") return PlannerKind::kCem;
  if (name == "cem-gd") return PlannerKind::kCemGd;
  if (name == "gradient") return PlannerKind::kGradient;
  throw InvalidArgument("unknown planner kind '" + name +
                        "'; expected cem, cem-gd or gradient");
}

inline void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidArgument("config: " + field + " " + why);
  };
  if (environments.empty()) fail("environments", "must be nonempty");
  for (const std::string& name : environments) environment(name);
  parse_planner(planner, planner_config);
  planner_config.validate();
  if (episode_length < 1) fail("episode_length", "must be >= 1");
  if (num_seeds < 1) fail("num_seeds", "must be >= 1");
  if (model.source == ModelSource::kMlp && model.path.empty()) {
    fail("model.path", "is required when model.source is \"mlp\"");
  }
  if (!(goal_tolerance > 0.0)) fail("goal_tolerance", "must be positive");
  if (threads < 0) fail("threads", "must be >= 0");
  if (ninit_sweep.trials < 1) fail("ninit_sweep.trials", "must be >= 1");
  for (int v : ninit_sweep.values) {
    if (v < 1) fail("ninit_sweep.values", "entries must be positive");
  }
  if (sample_sweep.trials < 1) fail("sample_sweep.trials", "must be >= 1");
  for (const std::string& p : sample_sweep.planners) {
    if (parse_planner_kind(p) == PlannerKind::kGradient) {
      fail("sample_sweep.planners", "supports only cem and cem-gd");
    }
  }
  for (int b : sample_sweep.budgets) {
    if (b < 1) fail("sample_sweep.budgets", "entries must be positive");
  }
  for (const std::string& p : compare_planners) parse_planner(p, planner_config);
  if (train.rollouts < 1) fail("train.rollouts", "must be >= 1");
  if (train.rollout_length < 1) fail("train.rollout_length", "must be >= 1");
  if (train.fit.epochs < 0) fail("train.epochs", "must be >= 0");
  if (train.fit.batch_size < 1) fail("train.batch_size", "must be >= 1");
  if (!(train.fit.learning_rate > 0.0)) fail("train.learning_rate", "must be positive");
  for (int h : train.fit.hidden) {
    if (h < 1) fail("train.hidden", "entries must be positive");
  }
  if (gradcheck.probes < 1) fail("gradcheck.probes", "must be >= 1");
  if (gradcheck.horizon < 1) fail("gradcheck.horizon", "must be >= 1");
  if (!(gradcheck.step > 0.0)) fail("gradcheck.step", "must be positive");
}

namespace detail {

// Walks one JSON object, converting fields and rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw InvalidArgument("config: " + where() + " must be an object");
    }
  }

  ~ObjectReader() = default;

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_number()) type_error(key, "a number");
    out = v.get<double>();
  }

  void read(const std::string& key, int& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_number_integer()) type_error(key, "an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      type_error(key, "an integer in range");
    }
    out = static_cast<int>(x);
  }

  void read(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      type_error(key, "a nonnegative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_string()) type_error(key, "a string");
    out = v.get<std::string>();
  }

  void read(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_array()) type_error(key, "an array of integers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) type_error(key, "an array of integers");
      out.push_back(e.get<int>());
    }
  }

  void read(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (!v.is_array()) type_error(key, "an array of strings");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_string()) type_error(key, "an array of strings");
      out.push_back(e.get<std::string>());
    }
  }

  // A split is either a total budget or {"samples_per_iter", "iterations"}.
  void read(const std::string& key, SampleSplit& out) {
    if (!has(key)) return;
    const nlohmann::json& v = raw(key);
    if (v.is_number_integer()) {
      const int budget = v.get<int>();
      if (budget < 1) type_error(key, "a positive budget");
      out = default_split(budget);
      return;
    }
    if (!v.is_object()) {
      type_error(key, "a budget or {samples_per_iter, iterations}");
    }
    ObjectReader sub(v, field(key));
    sub.read("samples_per_iter", out.samples_per_iter);
    sub.read("iterations", out.iterations);
    sub.finish();
  }

  // Throws on keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw InvalidArgument("config: unknown field '" + field(it.key()) + "'");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "top level" : "'" + path_ + "'"; }

  [[noreturn]] void type_error(const std::string& key, const std::string& what) const {
    throw InvalidArgument("config: field '" + field(key) + "' must be " + what);
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void read_barrier(ObjectReader& r, BarrierParams& p) {
  r.read("center_x", p.center_x);
  r.read("center_y", p.center_y);
  r.read("radius", p.radius);
  r.read("gain", p.gain);
  r.read("goal_x", p.goal_x);
  r.read("goal_y", p.goal_y);
  r.read("start_x", p.start_x);
  r.read("start_y", p.start_y);
  r.read("dt", p.dt);
  r.read("action_limit", p.action_limit);
  r.read("action_cost", p.action_cost);
  r.read("smoothing", p.smoothing);
}

inline void read_cartpole(ObjectReader& r, CartPoleParams& p) {
  r.read("cart_mass", p.cart_mass);
  r.read("pole_mass", p.pole_mass);
  r.read("half_length", p.half_length);
  r.read("gravity", p.gravity);
  r.read("dt", p.dt);
  r.read("force_scale", p.force_scale);
  r.read("action_limit", p.action_limit);
  r.read("position_cost", p.position_cost);
  r.read("action_cost", p.action_cost);
  r.read("start_angle", p.start_angle);
}

inline void read_planner_config(ObjectReader& r, PlannerConfig& c) {
  r.read("horizon", c.horizon);
  r.read("n_init", c.initial);
  r.read("n_r", c.replan);
  r.read("alpha", c.alpha);
  r.read("k_elite", c.k_elite);
  r.read("k", c.k);
  r.read("gradient_steps", c.gradient_steps);
  r.read("line_search_trials", c.line_search_trials);
  r.read("eta_init", c.eta_init);
  r.read("rho", c.rho);
  r.read("variance_floor", c.variance_floor);
  r.read("initial_variance", c.initial_variance);
}

template <class Fn>
void read_object(ObjectReader& parent, const std::string& key, Fn&& fn) {
  if (!parent.has(key)) return;
  ObjectReader sub(parent.raw(key), parent.field(key));
  fn(sub);
  sub.finish();
}

inline nlohmann::json split_to_json(const SampleSplit& s) {
  return {{"samples_per_iter", s.samples_per_iter}, {"iterations", s.iterations}};
}

}  // namespace detail

// Applies the fields present in `j` on top of `base`.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  using detail::ObjectReader;
  ObjectReader r(j, "");
  int version = -1;
  r.read("version", version);
  if (version != kConfigVersion) {
    throw InvalidArgument("config: field 'version' must be " +
                          std::to_string(kConfigVersion));
  }
  RunConfig c = std::move(base);
  r.read("environments", c.environments);
  detail::read_object(r, "barrier",
                      [&](ObjectReader& s) { detail::read_barrier(s, c.barrier); });
  detail::read_object(r, "cartpole", [&](ObjectReader& s) {
    detail::read_cartpole(s, c.cartpole);
  });
  r.read("planner", c.planner);
  detail::read_object(r, "planner_config", [&](ObjectReader& s) {
    detail::read_planner_config(s, c.planner_config);
  });
  r.read("episode_length", c.episode_length);
  r.read("num_seeds", c.num_seeds);
  r.read("first_seed", c.first_seed);
  detail::read_object(r, "model", [&](ObjectReader& s) {
    std::string source = c.model.source == ModelSource::kMlp ? "mlp" : "analytic";
    s.read("source", source);
    if (source == "analytic") {
      c.model.source = ModelSource::kAnalytic;
    } else if (source == "mlp") {
      c.model.source = ModelSource::kMlp;
    } else {
      throw InvalidArgument("config: field 'model.source' must be \"analytic\" or \"mlp\"");
    }
    s.read("path", c.model.path);
  });
  r.read("goal_tolerance", c.goal_tolerance);
  r.read("threads", c.threads);
  detail::read_object(r, "ninit_sweep", [&](ObjectReader& s) {
    s.read("values", c.ninit_sweep.values);
    s.read("trials", c.ninit_sweep.trials);
  });
  detail::read_object(r, "sample_sweep", [&](ObjectReader& s) {
    s.read("planners", c.sample_sweep.planners);
    s.read("budgets", c.sample_sweep.budgets);
    s.read("trials", c.sample_sweep.trials);
  });
  r.read("compare_planners", c.compare_planners);
  detail::read_object(r, "train", [&](ObjectReader& s) {
    s.read("rollouts", c.train.rollouts);
    s.read("rollout_length", c.train.rollout_length);
    s.read("hidden", c.train.fit.hidden);
    s.read("epochs", c.train.fit.epochs);
    s.read("batch_size", c.train.fit.batch_size);
    s.read("learning_rate", c.train.fit.learning_rate);
    s.read("output", c.train.output);
  });
  detail::read_object(r, "gradcheck", [&](ObjectReader& s) {
    s.read("probes", c.gradcheck.probes);
    s.read("horizon", c.gradcheck.horizon);
    s.read("step", c.gradcheck.step);
  });
  r.finish();
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  const BarrierParams& b = c.barrier;
  const CartPoleParams& p = c.cartpole;
  const PlannerConfig& pc = c.planner_config;
  return {
      {"version", kConfigVersion},
      {"environments", c.environments},
      {"barrier",
       {{"center_x", b.center_x}, {"center_y", b.center_y}, {"radius", b.radius},
        {"gain", b.gain}, {"goal_x", b.goal_x}, {"goal_y", b.goal_y},
        {"start_x", b.start_x}, {"start_y", b.start_y}, {"dt", b.dt},
        {"action_limit", b.action_limit}, {"action_cost", b.action_cost},
        {"smoothing", b.smoothing}}},
      {"cartpole",
       {{"cart_mass", p.cart_mass}, {"pole_mass", p.pole_mass},
        {"half_length", p.half_length}, {"gravity", p.gravity}, {"dt", p.dt},
        {"force_scale", p.force_scale}, {"action_limit", p.action_limit},
        {"position_cost", p.position_cost}, {"action_cost", p.action_cost},
        {"start_angle", p.start_angle}}},
      {"planner", c.planner},
      {"planner_config",
       {{"horizon", pc.horizon}, {"n_init", detail::split_to_json(pc.initial)},
        {"n_r", detail::split_to_json(pc.replan)}, {"alpha", pc.alpha},
        {"k_elite", pc.k_elite}, {"k", pc.k},
        {"gradient_steps", pc.gradient_steps},
        {"line_search_trials", pc.line_search_trials},
        {"eta_init", pc.eta_init}, {"rho", pc.rho},
        {"variance_floor", pc.variance_floor},
        {"initial_variance", pc.initial_variance}}},
      {"episode_length", c.episode_length},
      {"num_seeds", c.num_seeds},
      {"first_seed", c.first_seed},
      {"model",
       {{"source", c.model.source == ModelSource::kMlp ? "mlp" : "analytic"},
        {"path", c.model.path}}},
      {"goal_tolerance", c.goal_tolerance},
      {"threads", c.threads},
      {"ninit_sweep",
       {{"values", c.ninit_sweep.values}, {"trials", c.ninit_sweep.trials}}},
      {"sample_sweep",
       {{"planners", c.sample_sweep.planners},
        {"budgets", c.sample_sweep.budgets},
        {"trials", c.sample_sweep.trials}}},
      {"compare_planners", c.compare_planners},
      {"train",
       {{"rollouts", c.train.rollouts}, {"rollout_length", c.train.rollout_length},
        {"hidden", c.train.fit.hidden}, {"epochs", c.train.fit.epochs},
        {"batch_size", c.train.fit.batch_size},
        {"learning_rate", c.train.fit.learning_rate},
        {"output", c.train.output}}},
      {"gradcheck",
       {{"probes", c.gradcheck.probes}, {"horizon", c.gradcheck.horizon},
        {"step", c.gradcheck.step}}},
  };
}

// Built-in configurations usable by name in place of a file.
inline std::vector<std::string> builtin_config_names() {
  return {"paper_defaults", "smoke"};
}

inline RunConfig builtin_config(const std::string& name) {
  RunConfig c;
  if (name == "paper_defaults") return c;
  if (name == "smoke") {
    c.episode_length = 10;
    c.num_seeds = 2;
    c.planner_config.initial = {100, 5};
    c.ninit_sweep = {{50, 500}, 2};
    c.sample_sweep = {{"cem", "cem-gd"}, {50, 500}, 2};
    c.train.rollouts = 10;
    c.train.rollout_length = 50;
    c.train.fit.hidden = {16, 16};
    c.train.fit.epochs = 2;
    c.gradcheck.probes = 10;
    return c;
  }
  throw InvalidArgument("unknown built-in config '" + name +
                        "'; built-ins: " + join(builtin_config_names()));
}

// `source` is a file path or the name of a built-in configuration.
inline RunConfig load_config(const std::string& source) {
  const auto names = builtin_config_names();
  if (std::find(names.begin(), names.end(), source) != names.end() &&
      !std::filesystem::exists(source)) {
    return builtin_config(source);
  }
  std::ifstream is(source);
  if (!is) {
    throw InvalidArgument("config file not found: '" + source +
                          "' (built-ins: " + join(names) + ")");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("config: malformed JSON in '" + source + "': " + e.what());
  }
  return config_from_json(j);
}

// Output directory: the explicit flag, else $CEMGD_OUT_DIR, else "results".
inline std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CEMGD_OUT_DIR"); env != nullptr && *env) {
    return env;
  }
  return "results";
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_CONFIG_HPP_
