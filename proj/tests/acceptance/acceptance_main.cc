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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion names to run a subset.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arena/core/clock.h"
#include "arena/core/random.h"
#include "arena/persistence/event_log.h"
#include "arena/pipeline/event_pipeline.h"
#include "arena/rating/elo.h"
#include "arena/sim/simulation.h"

namespace arena::acceptance {
namespace {

// Tolerances and budgets.
constexpr double kFormulaTolerance = 1e-9;
constexpr double kDriftPerUpdate = 1e-9;
constexpr double kDriftCumulative = 1e-6;
constexpr double kMinSpearman = 0.9;
constexpr double kTickTolerance = 1e-9;
constexpr double kMaxP99Ms = 10.0;
constexpr double kIngestRate = 5000.0;
constexpr double kMinRateShare = 0.99;
constexpr int kStudySeeds = 100;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::filesystem::path ScenarioPath(const std::string& name) {
  return std::filesystem::path(ARENA_SCENARIO_DIR) / (name + ".json");
}

std::filesystem::path MakeTempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "arena-acceptance-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  return pattern;
}

// ---- 1. Formula fidelity --------------------------------------------------

Outcome FormulaFidelity() {
  RatingParams plain;
  plain.pair_decay_gamma = 1.0;
  RatingState a, b;
  a.match_count = b.match_count = plain.cold_start_window;  // past cold start
  const UpdateResult u = ApplyUpdate(a, b, arena::Outcome::Win(), 0, plain);

  struct Check {
    const char* what;
    double got;
    double want;
  };
  const Check checks[] = {
      {"expected_score(1000,1400)", ExpectedScore(1000, 1400, 1.0), 1.0 / 11.0},
      {"update A", u.new_rating_a, 1016.0},
      {"update B", u.new_rating_b, 984.0},
      {"effective_k(32,0.9,2)", EffectiveK(32, 0.9, 2), 25.92},
      {"regress(1200,1000,0.1)", RegressTowardMean(1200, 1000, 0.1), 1180.0},
  };
  double worst = 0.0;
  std::string worst_what;
  for (const Check& c : checks) {
    const double err = std::abs(c.got - c.want);
    if (err >= worst) {
      worst = err;
      worst_what = c.what;
    }
  }
  return {worst < kFormulaTolerance,
          Fmt("max |error| %.3g (%s), tolerance %.0e", worst, worst_what.c_str(),
              kFormulaTolerance)};
}

// ---- 2. Conservation ------------------------------------------------------

Outcome Conservation() {
  std::mt19937_64 gen(20261016);
  std::uniform_real_distribution<double> rating(400.0, 2000.0);
  std::uniform_int_distribution<int> pick(0, 63);
  std::uniform_int_distribution<std::int64_t> pair_count(0, 60);
  std::uniform_int_distribution<int> score(0, 2);
  std::bernoulli_distribution cold(0.5);
  RatingParams params;

  std::vector<RatingState> pool(64);
  for (RatingState& s : pool) s.rating = rating(gen);
  auto total = [&] {
    long double sum = 0;
    for (const RatingState& s : pool) sum += s.rating;
    return sum;
  };
  const long double start = total();
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    int x = pick(gen), y = pick(gen);
    while (y == x) y = pick(gen);
    RatingState& a = pool[x];
    RatingState& b = pool[y];
    a.match_count = cold(gen) ? 0 : params.cold_start_window;
    b.match_count = cold(gen) ? 0 : params.cold_start_window;
    const arena::Outcome outcome = arena::Outcome::FromScore(score(gen) / 2.0);
    const UpdateResult u = ApplyUpdate(a, b, outcome, pair_count(gen), params);
    worst = std::max(worst, std::abs((u.new_rating_a + u.new_rating_b) - (a.rating + b.rating)));
    a.rating = u.new_rating_a;
    b.rating = u.new_rating_b;
  }
  const double cumulative = static_cast<double>(std::abs(total() - start));
  return {worst < kDriftPerUpdate && cumulative < kDriftCumulative,
          Fmt("100000 updates, max per-update drift %.3g (< %.0e), cumulative %.3g (< %.0e)",
              worst, kDriftPerUpdate, cumulative, kDriftCumulative)};
}

// ---- 3. Complementarity and monotonicity ----------------------------------

Outcome ComplementarityMonotonicity() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> rating(0.0, 3000.0);
  std::uniform_real_distribution<double> step(1.0, 500.0);
  std::uniform_int_distribution<std::int64_t> pair_count(0, 60);
  std::uniform_int_distribution<int> score(0, 2);
  RatingParams params;
  int complement_bad = 0, monotone_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double ra = rating(gen), rb = rating(gen);
    RatingState a{ra, 0, {}}, b{rb, 40, {}};
    const UpdateResult u =
        ApplyUpdate(a, b, arena::Outcome::FromScore(score(gen) / 2.0), pair_count(gen), params);
    const bool ok = std::abs(ExpectedScore(ra, rb) + ExpectedScore(rb, ra) - 1.0) < 1e-12 &&
                    std::abs((u.new_rating_a - ra) + (u.new_rating_b - rb)) < 1e-9;
    if (!ok) ++complement_bad;
  }
  for (int i = 0; i < 10000; ++i) {
    const double ra = rating(gen), rb = rating(gen), d = step(gen);
    const std::int64_t n = pair_count(gen);
    RatingState a{ra, 40, {}}, b{rb, 40, {}};
    RatingState a_up{ra + d, 40, {}};
    const UpdateResult win = ApplyUpdate(a, b, arena::Outcome::Win(), n, params);
    const UpdateResult loss = ApplyUpdate(a, b, arena::Outcome::Loss(), n, params);
    const bool ok = ExpectedScore(ra + d, rb) > ExpectedScore(ra, rb) &&
                    ExpectedScore(ra, rb + d) < ExpectedScore(ra, rb) &&
                    win.new_rating_a >= ra && win.new_rating_b <= rb &&
                    loss.new_rating_a <= ra && loss.new_rating_b >= rb &&
                    ApplyUpdate(a_up, b, arena::Outcome::Win(), n, params).new_rating_a -
                            (ra + d) <= win.new_rating_a - ra;
    if (!ok) ++monotone_bad;
  }
  return {complement_bad == 0 && monotone_bad == 0,
          Fmt("complementarity %d/10000 counterexamples, monotonicity %d/10000",
              complement_bad, monotone_bad)};
}

// ---- 4. Convergence --------------------------------------------------------

Outcome Convergence() {
  const sim::SimScenario s = sim::SimScenario::Load(ScenarioPath("convergence"));
  const sim::SimReport r = sim::RunScenario(s);
  return {r.spearman >= kMinSpearman && s.models.size() == 20 && s.vote_count == 50000,
          Fmt("%zu models, %lld votes, seed %llu: spearman %.4f (>= %.2f)", s.models.size(),
              static_cast<long long>(s.vote_count), static_cast<unsigned long long>(s.seed),
              r.spearman, kMinSpearman)};
}

// ---- 5-6. Parameter studies ------------------------------------------------

Outcome Study(const std::string& scenario, const std::string& param, double baseline,
              double candidate) {
  const sim::SimScenario s = sim::SimScenario::Load(ScenarioPath(scenario));
  const sim::Comparison c = sim::CompareParams(s, param, {baseline, candidate}, kStudySeeds);
  const double base = c.variants[0].median;
  const double cand = c.variants[1].median;
  int wins = 0;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (c.variants[1].metrics[i] < c.variants[0].metrics[i]) ++wins;
  }
  return {cand < base,
          Fmt("median %s over %d seeds: %s=%g -> %.6g, %s=%g -> %.6g (candidate better on %d seeds)",
              std::string(sim::StudyMetricName(s.kind)).c_str(), kStudySeeds, param.c_str(),
              baseline, base, param.c_str(), candidate, cand, wins)};
}

// ---- 7. Regression ----------------------------------------------------------

Outcome Regression() {
  const sim::SimScenario s = sim::SimScenario::Load(ScenarioPath("inactive_leader"));
  const sim::SimReport r = sim::RunScenario(s);
  const double lambda = s.params.regression_lambda;
  int regressed = 0;
  double worst = 0.0;
  for (const sim::TickRecord& t : r.ticks) {
    if (!t.subject_regressed) continue;
    ++regressed;
    const double want = t.mean_before + (1.0 - lambda) * (t.subject_before - t.mean_before);
    worst = std::max(worst, std::abs(t.subject_after - want));
  }
  const bool toward = *r.frozen_final_rating < *r.frozen_rating_at_freeze;
  const bool overtaken = *r.frozen_overtaken_at >= 0 && *r.frozen_final_rank > 1;
  return {lambda > 0 && regressed > 0 && worst < kTickTolerance && toward && overtaken,
          Fmt("lambda %g: %d ticks regressed the frozen leader, max |error| vs (1-lambda) %.3g; "
              "rating %.1f -> %.1f; overtaken at vote %lld, final rank %zu",
              lambda, regressed, worst, *r.frozen_rating_at_freeze, *r.frozen_final_rating,
              static_cast<long long>(*r.frozen_overtaken_at), *r.frozen_final_rank)};
}

// ---- 8. Replay determinism and crash recovery ----------------------------

// 10,000 events: registrations, votes over six tracks and periodic ticks.
std::vector<ArenaEvent> MakeEvents(std::size_t count) {
  std::vector<ArenaEvent> events;
  const std::vector<std::string> models = {"m0", "m1", "m2", "m3", "m4", "m5", "m6", "m7"};
  for (Track t : kAllTracks) {
    for (const std::string& m : models) {
      RegistrationPayload reg;
      reg.model_id = m;
      reg.tracks.assign(kAllTracks.begin(), kAllTracks.end());
      events.push_back(ArenaEvent::Registration(
          "reg:" + m + ":" + std::string(TrackId(t)), t, reg));
    }
  }
  SplitMix64 rng(42);
  std::size_t i = 0;
  while (events.size() < count) {
    ++i;
    if (i % 997 == 0) {
      events.push_back(ArenaEvent::RegressionTick("tick-" + std::to_string(i)));
      continue;
    }
    const Track t = kAllTracks[rng.NextBelow(kTrackCount)];
    const std::size_t a = rng.NextBelow(models.size());
    std::size_t b = rng.NextBelow(models.size() - 1);
    if (b >= a) ++b;
    VotePayload vote;
    vote.battle_id = "b" + std::to_string(i);
    vote.model_a = models[a];
    vote.model_b = models[b];
    vote.outcome = arena::Outcome::FromScore(static_cast<double>(rng.NextBelow(3)) / 2.0);
    vote.voter_id = "v";
    vote.submitted_at = *ParseRfc3339("2026-01-01T00:00:00Z");
    events.push_back(ArenaEvent::Vote("e" + std::to_string(i), t, vote));
  }
  return events;
}

std::string Fingerprint(EventPipeline& pipeline) {
  nlohmann::json j = pipeline.ExportState().ToJson();
  for (Track t : kAllTracks) j["current_version"][std::string(TrackId(t))] = pipeline.Current(t)->version;
  return j.dump();
}

// Each event is enqueued one simulated hour after the previous one, so ticks
// see some models as inactive.
std::string ProcessUninterrupted(const std::vector<ArenaEvent>& events, std::size_t prefix) {
  ManualClock clock(*ParseRfc3339("2026-01-01T00:00:00Z"));
  auto log = EventLog::InMemory();
  PipelineOptions options;
  options.start_workers = false;
  options.queue_capacity = events.size() + 1;
  EventPipeline pipeline(*log, UniformParams(), clock, options);
  for (std::size_t i = 0; i < prefix; ++i) {
    pipeline.Enqueue(events[i]);
    clock.Advance(std::chrono::hours(1));
    pipeline.ProcessAll();
  }
  return Fingerprint(pipeline);
}

Outcome ReplayDeterminism() {
  const std::filesystem::path dir = MakeTempDir();
  const std::vector<ArenaEvent> events = MakeEvents(10000);
  std::string detail;
  bool pass = true;

  // Replay twice from the same file.
  {
    const auto path = dir / "replay.jsonl";
    {
      ManualClock clock(*ParseRfc3339("2026-01-01T00:00:00Z"));
      auto log = EventLog::OpenFile(path);
      PipelineOptions options;
      options.start_workers = false;
      options.queue_capacity = events.size() + 1;
      EventPipeline pipeline(*log, UniformParams(), clock, options);
      for (const ArenaEvent& e : events) {
        pipeline.Enqueue(e);
        clock.Advance(std::chrono::hours(1));
      }
      pipeline.ProcessAll();
    }
    std::string first, second;
    for (std::string* out : {&first, &second}) {
      ManualClock clock;
      auto log = EventLog::OpenFile(path);
      PipelineOptions options;
      options.start_workers = false;
      EventPipeline pipeline(*log, UniformParams(), clock, options);
      *out = Fingerprint(pipeline);
    }
    const bool same = first == second && first == ProcessUninterrupted(events, events.size());
    pass = pass && same;
    detail += Fmt("10000-event replay x2 %s", same ? "bit-identical" : "DIFFERS");
  }

  // Crash: a child process ingests through worker threads, writes one state
  // snapshot along the way, and is SIGKILLed mid-stream.
  {
    const auto path = dir / "crash.jsonl";
    const auto snapshots = dir / "snapshots";
    constexpr std::size_t kKillAfter = 6000;
    int ready[2];
    if (::pipe(ready) != 0) return {false, "pipe failed"};
    std::fflush(stdout);
    const pid_t child = ::fork();
    if (child == 0) {
      ::close(ready[0]);
      ManualClock clock(*ParseRfc3339("2026-01-01T00:00:00Z"));
      auto log = EventLog::OpenFile(path);
      SnapshotStore store(snapshots);
      PipelineOptions options;
      options.queue_capacity = events.size() + 1;
      EventPipeline pipeline(*log, UniformParams(), clock, options, &store);
      for (std::size_t i = 0; i < events.size(); ++i) {
        pipeline.Enqueue(events[i]);
        clock.Advance(std::chrono::hours(1));
        if (i + 1 == 3000) pipeline.WriteStateSnapshot(store);
        if (i + 1 == kKillAfter) {
          const char byte = 1;
          if (::write(ready[1], &byte, 1) != 1) ::_exit(3);
        }
      }
      ::pause();
      ::_exit(0);
    }
    ::close(ready[1]);
    char byte = 0;
    const bool signalled = ::read(ready[0], &byte, 1) == 1;
    ::close(ready[0]);
    ::kill(child, SIGKILL);
    int status = 0;
    ::waitpid(child, &status, 0);
    const bool killed = WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL;

    ManualClock clock;
    auto log = EventLog::OpenFile(path);
    SnapshotStore store(snapshots);
    PipelineOptions options;
    options.start_workers = false;
    EventPipeline recovered(*log, UniformParams(), clock, options, &store);
    const std::size_t logged = log->size();
    const bool durable = logged >= kKillAfter && logged <= events.size();
    const bool snapshot_used = store.LoadLatest().has_value();
    const bool same = durable && Fingerprint(recovered) == ProcessUninterrupted(events, logged);
    pass = pass && signalled && killed && durable && snapshot_used && same;
    detail += Fmt("; SIGKILL after %zu acks, %zu records on disk, snapshot %s, recovery %s",
                  kKillAfter, logged, snapshot_used ? "used" : "MISSING",
                  same ? "equals uninterrupted run" : "DIFFERS");
  }
  std::filesystem::remove_all(dir);
  return {pass, detail};
}

// ---- 9. Latency -------------------------------------------------------------

Outcome Latency() {
  const std::filesystem::path dir = MakeTempDir();
  sim::LoadOptions o;
  o.votes_per_second = kIngestRate;
  o.duration = std::chrono::seconds(30);
  o.producers = 1;
  o.log_path = dir / "load.jsonl";
  o.sync = SyncPolicy::kBatched;
  o.batch_window = std::chrono::milliseconds(5);
  const sim::LoadReport r = sim::RunLoad(o);
  std::filesystem::remove_all(dir);
  const bool rate_ok = r.achieved_rate >= kMinRateShare * kIngestRate;
  const bool bounded = r.max_queue_depth < r.queue_capacity && r.rejected == 0;
  const bool all_applied = r.votes_applied == r.votes_sent;
  return {rate_ok && bounded && all_applied && r.latency.p99_ms < kMaxP99Ms,
          Fmt("%lld votes in 30 s at %.1f/s (>= %.0f), p50 %.3f ms, p99 %.3f ms (< %.0f), "
              "max %.3f ms, max queue depth %zu of %zu, rejected %lld",
              static_cast<long long>(r.votes_sent), r.achieved_rate,
              kMinRateShare * kIngestRate, r.latency.p50_ms, r.latency.p99_ms, kMaxP99Ms,
              r.latency.max_ms, r.max_queue_depth, r.queue_capacity,
              static_cast<long long>(r.rejected))};
}

int Main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"formula_fidelity", 1, FormulaFidelity},
      {"conservation", 10, Conservation},
      {"complementarity_monotonicity", 10, ComplementarityMonotonicity},
      {"convergence", 60, Convergence},
      {"cold_start", 300, [] { return Study("late_joiner", "alpha", 1.0, 1.5); }},
      {"pair_decay", 300, [] { return Study("oversampled_pair", "gamma", 1.0, 0.9); }},
      {"regression", 60, Regression},
      {"replay_determinism", 120, ReplayDeterminism},
      {"latency", 60, Latency},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = seconds < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::printf("%s %s: %s [%.2f s of %.0f s budget]\n", pass ? "PASS" : "FAIL", c.name.c_str(),
                o.detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace arena::acceptance

int main(int argc, char** argv) { return arena::acceptance::Main(argc, argv); }
