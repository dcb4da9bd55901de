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

#ifndef CEMGD_HARNESS_CSV_HPP_
#define CEMGD_HARNESS_CSV_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cemgd/core.hpp"
#include "cemgd/harness/experiments.hpp"

namespace cemgd::harness {

// Column lists. Wall-time columns are always last so a byte comparison can
// drop them with a single cut.
inline const std::vector<std::string>& raw_columns() {
  static const std::vector<std::string> cols = {
      "env",          "planner",        "seed",
      "step",         "true_reward",    "model_reward",
      "samples_used", "gradient_rollouts", "memory_proxy",
      "plan_wall_time_s"};
  return cols;
}

inline const std::vector<std::string>& episode_columns() {
  static const std::vector<std::string> cols = {
      "env",     "planner",    "seed",   "episode_reward", "steps",
      "success", "went_above", "status"};
  return cols;
}

inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "env",
      "planner",
      "n_seeds",
      "n_failed",
      "mean_reward",
      "std_reward",
      "success_rate",
      "mean_samples_per_step",
      "mean_gradient_rollouts_per_step",
      "mean_memory_proxy",
      "mean_plan_wall_time_s"};
  return cols;
}

inline const std::vector<std::string>& ninit_columns() {
  static const std::vector<std::string> cols = {"n_init", "trials",
                                                "successes", "fraction"};
  return cols;
}

inline const std::vector<std::string>& sample_columns() {
  static const std::vector<std::string> cols = {"planner", "budget", "n_seeds",
                                                "mean_reward", "std_reward"};
  return cols;
}

// Shortest text that round-trips the double; NaN is written as an empty
// field.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Free text (planner ids, error messages) must not break the row structure.
inline std::string sanitize_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

namespace detail {

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

inline std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace detail

inline void write_raw_csv(std::ostream& os,
                          const std::vector<EpisodeResult>& episodes) {
  detail::write_row(os, raw_columns());
  for (const EpisodeResult& ep : episodes) {
    for (std::size_t t = 0; t < ep.steps.size(); ++t) {
      const StepRecord& s = ep.steps[t];
      detail::write_row(
          os, {sanitize_field(ep.env_id), sanitize_field(ep.planner_id),
               std::to_string(ep.seed), std::to_string(t),
               format_double(s.true_reward), format_double(s.model_reward),
               std::to_string(s.samples_used),
               std::to_string(s.gradient_rollouts),
               std::to_string(s.memory_proxy), format_double(s.plan_seconds)});
    }
  }
}

inline void write_episodes_csv(std::ostream& os,
                               const std::vector<EpisodeResult>& episodes) {
  detail::write_row(os, episode_columns());
  for (const EpisodeResult& ep : episodes) {
    const bool has_barrier = ep.barrier.has_value();
    detail::write_row(
        os, {sanitize_field(ep.env_id), sanitize_field(ep.planner_id),
             std::to_string(ep.seed), format_double(ep.episode_reward),
             std::to_string(ep.steps.size()),
             has_barrier ? detail::flag(ep.barrier->success()) : "",
             has_barrier ? detail::flag(ep.barrier->went_above) : "",
             ep.ok() ? "ok"
                     : sanitize_field("failed at step " +
                                      std::to_string(ep.failed_step) + ": " +
                                      ep.error)});
  }
}

inline void write_summary_csv(std::ostream& os,
                              const std::vector<SummaryRow>& rows) {
  detail::write_row(os, summary_columns());
  for (const SummaryRow& r : rows) {
    detail::write_row(
        os, {sanitize_field(r.env), sanitize_field(r.planner),
             std::to_string(r.n_seeds), std::to_string(r.n_failed),
             format_double(r.mean_reward), format_double(r.std_reward),
             format_double(r.success_rate),
             format_double(r.mean_samples_per_step),
             format_double(r.mean_gradient_rollouts_per_step),
             format_double(r.mean_memory_proxy),
             format_double(r.mean_plan_seconds)});
  }
}

inline void write_ninit_csv(std::ostream& os, const std::vector<NinitRow>& rows) {
  detail::write_row(os, ninit_columns());
  for (const NinitRow& r : rows) {
    detail::write_row(os, {std::to_string(r.n_init), std::to_string(r.trials),
                           std::to_string(r.successes),
                           format_double(r.fraction)});
  }
}

inline void write_samples_csv(std::ostream& os,
                              const std::vector<SampleRow>& rows) {
  detail::write_row(os, sample_columns());
  for (const SampleRow& r : rows) {
    detail::write_row(os, {sanitize_field(r.planner), std::to_string(r.budget),
                           std::to_string(r.n_seeds),
                           format_double(r.mean_reward),
                           format_double(r.std_reward)});
  }
}

// Writes `body` to dir/name, creating the directory if needed.
template <class Writer>
std::filesystem::path write_csv_file(const std::filesystem::path& dir,
                                     const std::string& name, Writer&& body) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory '" + dir.string() +
                "': " + ec.message());
  }
  const std::filesystem::path path = dir / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  body(os);
  if (!os) throw Error("write failed for '" + path.string() + "'");
  return path;
}

// Minimal reader for the files above (no quoting; fields never contain
// commas after sanitize_field).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw InvalidArgument("csv: no column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("csv: empty input");
  t.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
    if (t.rows.back().size() != t.header.size()) {
      throw InvalidArgument("csv: row " + std::to_string(t.rows.size()) +
                            " has " + std::to_string(t.rows.back().size()) +
                            " fields, expected " +
                            std::to_string(t.header.size()));
    }
  }
  return t;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return read_csv(is);
}

}  // namespace cemgd::harness

#endif  // CEMGD_HARNESS_CSV_HPP_
