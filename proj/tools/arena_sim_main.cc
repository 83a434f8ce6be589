// Copyright 2026 The Arena Authors.
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

// arena-sim: drives the arena with synthetic voters.
//
//   arena-sim run --scenario FILE [--seed N] --out DIR
//   arena-sim compare --scenario FILE --param alpha=1.0,1.5 [--replicates N] --out DIR
//   arena-sim load [--rate 5000] [--duration 30] [--parallel-ingest N] --out DIR

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arena/api/config.h"
#include "arena/core/errors.h"
#include "arena/sim/simulation.h"

namespace {

void WriteJson(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// "alpha=1.0,1.5" -> ("alpha", {1.0, 1.5}).
std::pair<std::string, std::vector<double>> ParseParamSpec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError("--param", "expected NAME=V1,V2,...");
  }
  std::vector<double> values;
  std::stringstream list(spec.substr(eq + 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw CLI::ValidationError("--param", "not a number: " + item);
    }
    values.push_back(v);
  }
  return {spec.substr(0, eq), values};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arena simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  bool no_csv = false;
  run->add_flag("--no-csv", no_csv, "Skip trajectories.csv");

  std::string param_spec;
  std::size_t replicates = 1;
  auto* compare = app.add_subcommand("compare", "Compare parameter values");
  compare->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  compare->add_option("--param", param_spec, "NAME=V1,V2,... (alpha, gamma, lambda, k, window)")
      ->required();
  compare->add_option("--replicates", replicates, "Seeds per value, starting at the scenario seed")
      ->check(CLI::PositiveNumber);
  compare->add_option("--seed", seed, "Override the first seed");
  compare->add_option("--out", out_dir, "Output directory")->required();

  arena::sim::LoadOptions load_options;
  double duration_s = 30.0;
  std::string log_path;
  std::string sync = "batched";
  auto* load = app.add_subcommand("load", "Paced ingest benchmark");
  load->add_option("--rate", load_options.votes_per_second, "Votes per second")
      ->check(CLI::PositiveNumber);
  load->add_option("--duration", duration_s, "Seconds")->check(CLI::PositiveNumber);
  load->add_option("--parallel-ingest", load_options.producers, "Concurrent producer threads")
      ->check(CLI::PositiveNumber);
  load->add_option("--models", load_options.model_count, "Models in the track");
  load->add_option("--log-path", log_path, "Log file; in memory when omitted");
  load->add_option("--sync", sync, "flush, fsync or batched")
      ->check(CLI::IsMember({"flush", "fsync", "batched"}));
  load->add_option("--queue-capacity", load_options.queue_capacity, "Per-track queue bound");
  load->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);
    if (*run) {
      auto scenario = arena::sim::SimScenario::Load(scenario_path);
      if (seed) scenario.seed = *seed;
      arena::sim::SimTiming timing;
      const auto report = arena::sim::RunScenario(scenario, &timing);
      WriteJson(out / "report.json", report.ToJson());
      if (!no_csv) report.WriteTrajectoryCsv(out / "trajectories.csv");
      WriteJson(out / "timing.json", {{"wall_seconds", timing.wall_seconds},
                                      {"latency",
                                       {{"count", timing.latency.count},
                                        {"p50_ms", timing.latency.p50_ms},
                                        {"p99_ms", timing.latency.p99_ms},
                                        {"max_ms", timing.latency.max_ms}}}});
      std::printf("%s: %lld votes, spearman %.4f, %s %.6g\n",
                  std::string(arena::sim::ScenarioKindName(scenario.kind)).c_str(),
                  static_cast<long long>(report.votes_applied), report.spearman,
                  std::string(arena::sim::StudyMetricName(scenario.kind)).c_str(),
                  arena::sim::StudyMetric(report));
    } else if (*compare) {
      auto scenario = arena::sim::SimScenario::Load(scenario_path);
      if (seed) scenario.seed = *seed;
      const auto [param, values] = ParseParamSpec(param_spec);
      const auto comparison = arena::sim::CompareParams(scenario, param, values, replicates);
      WriteJson(out / "comparison.json", comparison.ToJson());
      std::printf("%-10s %-24s\n", param.c_str(),
                  ("median " + std::string(arena::sim::StudyMetricName(scenario.kind))).c_str());
      for (const auto& v : comparison.variants) {
        std::printf("%-10g %-24.6g\n", v.value, v.median);
      }
    } else if (*load) {
      load_options.duration = std::chrono::milliseconds(std::llround(duration_s * 1000.0));
      load_options.log_path = log_path;
      load_options.sync = *arena::ParseSyncPolicy(sync);
      const auto report = arena::sim::RunLoad(load_options);
      WriteJson(out / "load.json", report.ToJson());
      std::printf("sent %lld applied %lld rejected %lld rate %.1f/s p50 %.3f ms p99 %.3f ms "
                  "max depth %zu\n",
                  static_cast<long long>(report.votes_sent),
                  static_cast<long long>(report.votes_applied),
                  static_cast<long long>(report.rejected), report.achieved_rate,
                  report.latency.p50_ms, report.latency.p99_ms, report.max_queue_depth);
    }
  } catch (const arena::ArenaError& e) {
    std::fprintf(stderr, "arena-sim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "arena-sim: %s\n", e.what());
    return 1;
  }
  return 0;
}
