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

#ifndef ARENA_SIM_SIMULATION_H_
#define ARENA_SIM_SIMULATION_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/core/track.h"
#include "arena/pipeline/event_pipeline.h"
#include "arena/rating/elo.h"
#include "json.hpp"

namespace arena::sim {

// Which study a scenario feeds. The kind selects the model whose behaviour
// the study metric describes; all kinds run through the same driver.
enum class ScenarioKind {
  kStandard,         // metric: Spearman rho against latent order
  kLateJoiner,       // metric: matches until the joiner enters its band
  kOversampledPair,  // metric: tail rating variance of the forced pair
  kInactiveLeader,   // metric: rank and drift of the frozen model
};

std::string_view ScenarioKindName(ScenarioKind kind);
std::optional<ScenarioKind> ParseScenarioKind(std::string_view name);

enum class VoterModel {
  // P(A beats B) = 1 / (1 + 10^((s_B - s_A) / 400)).
  kBradleyTerry,
  // The higher current skill always wins; left wins exact ties.
  kDeterministic,
};

struct SimModel {
  std::string id;
  // Latent skill on the rating scale at vote 0.
  double skill = 0.0;
  // Skill change per vote step.
  double skill_slope = 0.0;
  // Vote step at which the model is registered and starts battling.
  std::int64_t join_at = 0;
  // Vote step from which the model no longer battles.
  std::optional<std::int64_t> active_until;

  double SkillAt(std::int64_t step) const {
    return skill + skill_slope * static_cast<double>(step);
  }
};

struct ForcedPair {
  std::size_t a = 0;
  std::size_t b = 1;
  // Share of battles forced onto this pair.
  double fraction = 0.5;
};

// Scenario file (JSON):
//
//   {
//     "kind": "late_joiner",
//     "model_count": 10, "skill_spacing": 50,   // or "models": [...]
//     "models": [{"id": "m00", "skill": 0, "skill_slope": 0,
//                 "join_at": 0, "active_until": null}, ...],
//     "add_models": [...],                      // appended after generation
//     "vote_count": 10000, "seed": 1,
//     "params": {"cold_start_alpha": 1.5, ...},
//     "voter": "bradley_terry" | "deterministic",
//     "track": "ideation",
//     "forced_pair": {"a": 0, "b": 1, "fraction": 0.5},
//     "tick_every_votes": 0, "seconds_per_vote": 60,
//     "band": 50, "steady_fraction": 0.2, "tail_window": 1000,
//     "trajectory_stride": 0
//   }
struct SimScenario {
  ScenarioKind kind = ScenarioKind::kStandard;
  std::vector<SimModel> models;
  std::int64_t vote_count = 1000;
  std::uint64_t seed = 1;
  RatingParams params;
  VoterModel voter = VoterModel::kBradleyTerry;
  Track track = Track::kIdeation;
  std::optional<ForcedPair> forced_pair;
  // A regression tick after every this many votes; 0 disables ticks.
  std::int64_t tick_every_votes = 0;
  // Simulated time between votes.
  std::chrono::milliseconds time_per_vote = std::chrono::seconds(60);
  // Steady state is the mean rating over the final `steady_fraction` of the
  // run; a model has converged once it is within `band` of it.
  double band = 50.0;
  double steady_fraction = 0.2;
  // Votes covered by the oversampled-pair variance.
  std::int64_t tail_window = 1000;
  // Report one trajectory point every this many votes; 0 picks ~100 points.
  std::int64_t trajectory_stride = 0;

  // `n` models with skills spaced `spacing` apart, centred on 0, ids m00...
  static std::vector<SimModel> SpacedModels(std::size_t n, double spacing);

  // Throws ArenaError(kValidation).
  static SimScenario FromJson(const nlohmann::json& j);
  static SimScenario Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  void Validate() const;

  // The model the study metric is about: the first late joiner, the first
  // model of the forced pair, or the first model with active_until.
  std::optional<std::size_t> SubjectModel() const;
};

struct ModelResult {
  std::string id;
  double final_skill = 0.0;
  double final_rating = 0.0;
  std::int64_t match_count = 0;
  // 1-based rank on the final leaderboard.
  std::size_t rank = 0;
  double steady_mean = 0.0;
  // Own matches until the rating first came within `band` of steady_mean;
  // 0 when the starting rating already was, match_count + 1 when never.
  std::int64_t steps_to_band = 0;
};

struct TickRecord {
  std::int64_t after_vote = 0;
  double mean_before = 0.0;
  double subject_before = 0.0;
  double subject_after = 0.0;
  bool subject_regressed = false;
};

struct SimReport {
  SimScenario scenario;
  std::vector<ModelResult> models;  // in scenario order
  // Spearman rank correlation of final ratings against final latent skills.
  double spearman = 0.0;
  std::int64_t votes_applied = 0;
  std::int64_t ticks_applied = 0;
  std::uint64_t log_records = 0;

  // Study metrics; only the ones for the scenario kind are filled.
  std::optional<std::int64_t> joiner_steps_to_band;
  std::optional<double> pair_tail_variance;  // mean over both pair models
  std::optional<std::size_t> frozen_final_rank;
  std::optional<double> frozen_rating_at_freeze;
  std::optional<double> frozen_final_rating;
  std::optional<double> final_mean_rating;
  // First vote step at which an active model rated above the frozen one;
  // -1 if it never happened.
  std::optional<std::int64_t> frozen_overtaken_at;
  std::vector<TickRecord> ticks;

  // trajectory_steps[k] is the vote step of column k; trajectories[m][k] is
  // model m's rating then, or NaN before it joined.
  std::vector<std::int64_t> trajectory_steps;
  std::vector<std::vector<double>> trajectories;

  // Pure function of the scenario; wall-clock figures are not included.
  nlohmann::json ToJson() const;
  // step,<model ids...>; empty cells before a model joined.
  void WriteTrajectoryCsv(const std::filesystem::path& path) const;
};

struct SimTiming {
  double wall_seconds = 0.0;
  LatencySummary latency;
};

// Drives the scenario through the real engine and pipeline: fixture
// providers, an in-memory log, a manual clock and a pipeline without worker
// threads. Deterministic for a given scenario. Stack errors propagate.
SimReport RunScenario(const SimScenario& scenario, SimTiming* timing = nullptr);

// Average ranks for ties.
double SpearmanRho(const std::vector<double>& x, const std::vector<double>& y);

// Study metric for the scenario kind; smaller is better except for
// kStandard (rho) and kInactiveLeader (frozen model's final rank).
double StudyMetric(const SimReport& report);
std::string_view StudyMetricName(ScenarioKind kind);

// Median of a non-empty sample; the mean of the middle two for even sizes.
double Median(std::vector<double> values);

// Sets a RatingParams field by short name: alpha, gamma, lambda, k, window,
// base. Throws ArenaError(kValidation) on an unknown name.
void SetParam(RatingParams& params, std::string_view name, double value);

struct VariantResult {
  double value = 0.0;
  std::vector<double> metrics;  // one per seed
  double median = 0.0;
};

struct Comparison {
  ScenarioKind kind = ScenarioKind::kStandard;
  std::string param;
  std::vector<std::uint64_t> seeds;
  std::vector<VariantResult> variants;

  nlohmann::json ToJson() const;
};

// Runs the scenario once per (value, seed) with seeds scenario.seed,
// scenario.seed + 1, ... and collects the kind's study metric.
Comparison CompareParams(const SimScenario& scenario, const std::string& param,
                         const std::vector<double>& values, std::size_t replicates);

struct LoadOptions {
  double votes_per_second = 5000.0;
  std::chrono::milliseconds duration = std::chrono::seconds(30);
  // Concurrent producer threads sharing the rate.
  std::size_t producers = 1;
  std::size_t model_count = 10;
  Track track = Track::kIdeation;
  // Empty keeps the log in memory; otherwise a file log with `sync`.
  std::filesystem::path log_path;
  SyncPolicy sync = SyncPolicy::kBatched;
  std::chrono::milliseconds batch_window{5};
  std::size_t queue_capacity = 8192;
  std::uint64_t seed = 1;
};

struct LoadReport {
  std::int64_t votes_sent = 0;
  std::int64_t votes_applied = 0;
  std::int64_t rejected = 0;
  double wall_seconds = 0.0;
  // Accepted votes per second of producer running time.
  double achieved_rate = 0.0;
  LatencySummary latency;
  std::size_t max_queue_depth = 0;
  std::size_t queue_capacity = 0;

  nlohmann::json ToJson() const;
};

// Paced open-loop ingest through the engine against a pipeline with worker
// threads. Latency is enqueue acknowledgement to snapshot publication.
LoadReport RunLoad(const LoadOptions& options);

}  // namespace arena::sim

#endif  // ARENA_SIM_SIMULATION_H_
