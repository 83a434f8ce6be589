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

#include "arena/sim/simulation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "arena/api/config.h"
#include "arena/core/clock.h"
#include "arena/core/errors.h"
#include "arena/core/random.h"
#include "arena/core/thread_pool.h"
#include "arena/engine/arena_engine.h"
#include "arena/persistence/event_log.h"
#include "arena/provider/provider.h"

namespace arena::sim {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void Invalid(const std::string& what) {
  throw ArenaError(ErrorCode::kValidation, "scenario: " + what);
}

std::int64_t Integer(const json& j, const char* key) {
  if (!j.is_number_integer()) Invalid(std::string(key) + " must be an integer");
  return j.get<std::int64_t>();
}

double Number(const json& j, const char* key) {
  if (!j.is_number()) Invalid(std::string(key) + " must be a number");
  return j.get<double>();
}

SimModel ModelFromJson(const json& j) {
  if (!j.is_object()) Invalid("each model must be an object");
  SimModel m;
  for (const auto& [key, value] : j.items()) {
    if (key == "id") {
      if (!value.is_string()) Invalid("model id must be a string");
      m.id = value.get<std::string>();
    } else if (key == "skill") {
      m.skill = Number(value, "skill");
    } else if (key == "skill_slope") {
      m.skill_slope = Number(value, "skill_slope");
    } else if (key == "join_at") {
      m.join_at = Integer(value, "join_at");
    } else if (key == "active_until") {
      if (!value.is_null()) m.active_until = Integer(value, "active_until");
    } else {
      Invalid("unknown model key " + key);
    }
  }
  return m;
}

json ModelToJson(const SimModel& m) {
  return {{"id", m.id},
          {"skill", m.skill},
          {"skill_slope", m.skill_slope},
          {"join_at", m.join_at},
          {"active_until", m.active_until ? json(*m.active_until) : json(nullptr)}};
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> AverageRanks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double PopulationVariance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(v.size());
}

Timestamp SimEpoch() { return *ParseRfc3339("2026-01-01T00:00:00Z"); }

json LatencyToJson(const LatencySummary& s) {
  return {{"count", s.count}, {"p50_ms", s.p50_ms}, {"p99_ms", s.p99_ms}, {"max_ms", s.max_ms}};
}

}  // namespace

std::string_view ScenarioKindName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStandard:
      return "standard";
    case ScenarioKind::kLateJoiner:
      return "late_joiner";
    case ScenarioKind::kOversampledPair:
      return "oversampled_pair";
    case ScenarioKind::kInactiveLeader:
      return "inactive_leader";
  }
  return "standard";
}

std::optional<ScenarioKind> ParseScenarioKind(std::string_view name) {
  for (ScenarioKind k : {ScenarioKind::kStandard, ScenarioKind::kLateJoiner,
                         ScenarioKind::kOversampledPair, ScenarioKind::kInactiveLeader}) {
    if (ScenarioKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<SimModel> SimScenario::SpacedModels(std::size_t n, double spacing) {
  std::vector<SimModel> models(n);
  const double centre = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "m%02zu", i);
    models[i].id = id;
    models[i].skill = spacing * (static_cast<double>(i) - centre);
  }
  return models;
}

SimScenario SimScenario::FromJson(const json& j) {
  if (!j.is_object()) Invalid("top level must be an object");
  SimScenario s;
  std::optional<std::int64_t> model_count;
  double spacing = 50.0;
  std::vector<SimModel> added;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      auto kind = value.is_string() ? ParseScenarioKind(value.get<std::string>()) : std::nullopt;
      if (!kind) Invalid("unknown kind");
      s.kind = *kind;
    } else if (key == "model_count") {
      model_count = Integer(value, "model_count");
    } else if (key == "skill_spacing") {
      spacing = Number(value, "skill_spacing");
    } else if (key == "models" || key == "add_models") {
      if (!value.is_array()) Invalid(key + " must be an array");
      auto& target = key == "models" ? s.models : added;
      for (const json& m : value) target.push_back(ModelFromJson(m));
    } else if (key == "vote_count") {
      s.vote_count = Integer(value, "vote_count");
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) Invalid("seed must be an integer");
      s.seed = value.get<std::uint64_t>();
    } else if (key == "params") {
      s.params = RatingParamsFromJson(value);
    } else if (key == "voter") {
      const std::string v = value.is_string() ? value.get<std::string>() : "";
      if (v == "bradley_terry") {
        s.voter = VoterModel::kBradleyTerry;
      } else if (v == "deterministic") {
        s.voter = VoterModel::kDeterministic;
      } else {
        Invalid("voter must be bradley_terry or deterministic");
      }
    } else if (key == "track") {
      auto track = value.is_string() ? ParseTrack(value.get<std::string>()) : std::nullopt;
      if (!track) Invalid("unknown track");
      s.track = *track;
    } else if (key == "forced_pair") {
      if (!value.is_object()) Invalid("forced_pair must be an object");
      ForcedPair p;
      if (value.contains("a")) p.a = static_cast<std::size_t>(Integer(value["a"], "a"));
      if (value.contains("b")) p.b = static_cast<std::size_t>(Integer(value["b"], "b"));
      if (value.contains("fraction")) p.fraction = Number(value["fraction"], "fraction");
      s.forced_pair = p;
    } else if (key == "tick_every_votes") {
      s.tick_every_votes = Integer(value, "tick_every_votes");
    } else if (key == "seconds_per_vote") {
      s.time_per_vote = std::chrono::milliseconds(
          std::llround(Number(value, "seconds_per_vote") * 1000.0));
    } else if (key == "band") {
      s.band = Number(value, "band");
    } else if (key == "steady_fraction") {
      s.steady_fraction = Number(value, "steady_fraction");
    } else if (key == "tail_window") {
      s.tail_window = Integer(value, "tail_window");
    } else if (key == "trajectory_stride") {
      s.trajectory_stride = Integer(value, "trajectory_stride");
    } else {
      Invalid("unknown key " + key);
    }
  }
  if (model_count) {
    if (!s.models.empty()) Invalid("give either model_count or models");
    if (*model_count < 0) Invalid("model_count must be nonnegative");
    s.models = SpacedModels(static_cast<std::size_t>(*model_count), spacing);
  }
  s.models.insert(s.models.end(), added.begin(), added.end());
  s.Validate();
  return s;
}

SimScenario SimScenario::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Invalid("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return FromJson(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    Invalid(path.string() + " is not valid JSON: " + e.what());
  }
}

json SimScenario::ToJson() const {
  json models_json = json::array();
  for (const SimModel& m : models) models_json.push_back(ModelToJson(m));
  json j = {{"kind", ScenarioKindName(kind)},
            {"models", models_json},
            {"vote_count", vote_count},
            {"seed", seed},
            {"params", RatingParamsToJson(params)},
            {"voter", voter == VoterModel::kBradleyTerry ? "bradley_terry" : "deterministic"},
            {"track", TrackId(track)},
            {"tick_every_votes", tick_every_votes},
            {"seconds_per_vote", static_cast<double>(time_per_vote.count()) / 1000.0},
            {"band", band},
            {"steady_fraction", steady_fraction},
            {"tail_window", tail_window},
            {"trajectory_stride", trajectory_stride}};
  if (forced_pair) {
    j["forced_pair"] = {{"a", forced_pair->a}, {"b", forced_pair->b},
                        {"fraction", forced_pair->fraction}};
  }
  return j;
}

void SimScenario::Validate() const {
  try {
    params.Validate();
  } catch (const std::invalid_argument& e) {
    Invalid(e.what());
  }
  if (models.size() < 2) Invalid("model_count must be at least 2");
  if (vote_count < 1) Invalid("vote_count must be at least 1");
  std::map<std::string, int> ids;
  std::int64_t at_start = 0;
  for (const SimModel& m : models) {
    if (m.id.empty()) Invalid("model ids must be non-empty");
    if (++ids[m.id] > 1) Invalid("duplicate model id " + m.id);
    if (!std::isfinite(m.skill) || !std::isfinite(m.skill_slope)) Invalid("skills must be finite");
    if (m.join_at < 0 || m.join_at >= vote_count) Invalid("join_at must lie in [0, vote_count)");
    if (m.active_until && *m.active_until <= m.join_at) Invalid("active_until must follow join_at");
    if (m.join_at == 0 && (!m.active_until || *m.active_until > 0)) ++at_start;
  }
  if (at_start < 2) Invalid("at least two models must be active from the start");
  if (forced_pair) {
    if (forced_pair->a >= models.size() || forced_pair->b >= models.size() ||
        forced_pair->a == forced_pair->b) {
      Invalid("forced_pair must name two distinct models");
    }
    if (!(forced_pair->fraction >= 0.0 && forced_pair->fraction <= 1.0)) {
      Invalid("forced_pair fraction must lie in [0, 1]");
    }
  }
  if (tick_every_votes < 0) Invalid("tick_every_votes must be nonnegative");
  if (time_per_vote.count() < 0) Invalid("seconds_per_vote must be nonnegative");
  if (!(band > 0.0)) Invalid("band must be positive");
  if (!(steady_fraction > 0.0 && steady_fraction <= 1.0)) Invalid("steady_fraction must lie in (0, 1]");
  if (tail_window < 1) Invalid("tail_window must be positive");
  if (trajectory_stride < 0) Invalid("trajectory_stride must be nonnegative");
  if (kind == ScenarioKind::kLateJoiner &&
      std::none_of(models.begin(), models.end(), [](const SimModel& m) { return m.join_at > 0; })) {
    Invalid("late_joiner needs a model with join_at > 0");
  }
  if (kind == ScenarioKind::kOversampledPair) {
    if (!forced_pair) Invalid("oversampled_pair needs forced_pair");
    if (tail_window > vote_count) Invalid("tail_window must not exceed vote_count");
  }
  if (kind == ScenarioKind::kInactiveLeader &&
      std::none_of(models.begin(), models.end(), [](const SimModel& m) { return m.active_until.has_value(); })) {
    Invalid("inactive_leader needs a model with active_until");
  }
}

std::optional<std::size_t> SimScenario::SubjectModel() const {
  for (std::size_t i = 0; i < models.size(); ++i) {
    switch (kind) {
      case ScenarioKind::kLateJoiner:
        if (models[i].join_at > 0) return i;
        break;
      case ScenarioKind::kInactiveLeader:
        if (models[i].active_until) return i;
        break;
      case ScenarioKind::kOversampledPair:
        if (forced_pair) return forced_pair->a;
        break;
      case ScenarioKind::kStandard:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

double SpearmanRho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("SpearmanRho: need two samples of equal size >= 2");
  }
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("Median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

SimReport RunScenario(const SimScenario& scenario, SimTiming* timing) {
  scenario.Validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const Track track = scenario.track;
  const std::size_t m_count = scenario.models.size();
  const std::int64_t n_votes = scenario.vote_count;

  ManualClock clock(SimEpoch());
  auto log = EventLog::InMemory();
  PipelineOptions pipeline_options;
  pipeline_options.start_workers = false;
  pipeline_options.backpressure = BackpressureMode::kReject;
  EventPipeline pipeline(*log, UniformParams(scenario.params), clock, pipeline_options);
  ProviderGateway gateway;
  EngineOptions engine_options;
  engine_options.seed = scenario.seed ^ 0x9e3779b97f4a7c15ULL;
  ArenaEngine engine(pipeline, gateway, clock, InlineRunner(), engine_options);
  SplitMix64 rng(scenario.seed);

  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < m_count; ++i) index_of[scenario.models[i].id] = i;

  std::vector<bool> joined(m_count, false);
  std::vector<double> current(m_count, kNaN);
  std::vector<std::vector<double>> full(m_count, std::vector<double>(static_cast<std::size_t>(n_votes), kNaN));
  std::vector<std::vector<double>> own(m_count);
  std::size_t registered = 0;

  SimReport report;
  report.scenario = scenario;
  const std::optional<std::size_t> subject = scenario.SubjectModel();
  const bool frozen_study = scenario.kind == ScenarioKind::kInactiveLeader && subject;
  if (frozen_study) report.frozen_overtaken_at = -1;

  auto refresh = [&](std::size_t i) {
    current[i] = pipeline.RatingOf(track, scenario.models[i].id).value().rating;
  };
  auto active = [&](std::size_t i, std::int64_t step) {
    const SimModel& m = scenario.models[i];
    return joined[i] && (!m.active_until || step < *m.active_until);
  };

  const std::string prompt = "synthetic prompt";
  std::int64_t tick_count = 0;
  for (std::int64_t step = 0; step < n_votes; ++step) {
    for (std::size_t i = 0; i < m_count; ++i) {
      if (!joined[i] && scenario.models[i].join_at == step) {
        engine.RegisterModel(scenario.models[i].id, {track}, ProviderDescriptor::Fixture());
        pipeline.ProcessAll();
        joined[i] = true;
        ++registered;
        refresh(i);
      }
    }
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < m_count; ++i) {
      if (active(i, step)) live.push_back(i);
    }
    if (live.size() < 2) {
      throw ArenaError(ErrorCode::kArenaNotReady,
                       "fewer than two active models at vote " + std::to_string(step));
    }

    Battle battle;
    const bool forced = scenario.forced_pair && active(scenario.forced_pair->a, step) &&
                        active(scenario.forced_pair->b, step) &&
                        rng.NextDouble() < scenario.forced_pair->fraction;
    if (forced) {
      std::size_t l = scenario.forced_pair->a, r = scenario.forced_pair->b;
      if (rng.Next() & 1) std::swap(l, r);
      battle = engine.CreateBattleForPair(track, prompt, scenario.models[l].id, scenario.models[r].id);
    } else if (live.size() == registered) {
      battle = engine.CreateBattle(track, prompt, rng.Next());
    } else {
      std::vector<std::string> ids;
      for (std::size_t i : live) ids.push_back(scenario.models[i].id);
      auto [a, b] = SelectPair(ids.size(), pipeline.PairCounts(track, ids), rng);
      if (rng.Next() & 1) std::swap(a, b);
      battle = engine.CreateBattleForPair(track, prompt, ids[a], ids[b]);
    }

    const std::size_t left = index_of.at(battle.candidate_left);
    const std::size_t right = index_of.at(battle.candidate_right);
    const double s_left = scenario.models[left].SkillAt(step);
    const double s_right = scenario.models[right].SkillAt(step);
    bool left_wins;
    if (scenario.voter == VoterModel::kBradleyTerry) {
      const double p = 1.0 / (1.0 + std::pow(10.0, (s_right - s_left) / 400.0));
      left_wins = rng.NextDouble() < p;
    } else {
      left_wins = s_left >= s_right;
    }
    engine.CastVote(battle.battle_id, left_wins ? VoteChoice::kLeft : VoteChoice::kRight,
                    "sim-voter", "sim-vote-" + std::to_string(step));
    pipeline.ProcessAll();
    ++report.votes_applied;
    refresh(left);
    refresh(right);
    own[left].push_back(current[left]);
    own[right].push_back(current[right]);
    clock.Advance(scenario.time_per_vote);

    if (scenario.tick_every_votes > 0 && (step + 1) % scenario.tick_every_votes == 0) {
      TickRecord record;
      record.after_vote = step;
      double sum = 0.0;
      for (std::size_t i = 0; i < m_count; ++i) {
        if (joined[i]) sum += current[i];
      }
      record.mean_before = sum / static_cast<double>(registered);
      if (subject) record.subject_before = current[*subject];
      pipeline.Enqueue(ArenaEvent::RegressionTick("sim-tick-" + std::to_string(tick_count++)));
      std::optional<AppliedUpdate> applied;
      while (auto u = pipeline.ProcessNext(track)) applied = u;
      pipeline.ProcessAll();
      for (std::size_t i = 0; i < m_count; ++i) {
        if (joined[i]) refresh(i);
      }
      if (subject) {
        record.subject_after = current[*subject];
        record.subject_regressed =
            applied && std::find(applied->regressed.begin(), applied->regressed.end(),
                                 scenario.models[*subject].id) != applied->regressed.end();
      }
      report.ticks.push_back(record);
      ++report.ticks_applied;
    }

    for (std::size_t i = 0; i < m_count; ++i) full[i][static_cast<std::size_t>(step)] = current[i];

    if (frozen_study && *report.frozen_overtaken_at < 0 && !active(*subject, step) &&
        joined[*subject]) {
      for (std::size_t i : live) {
        if (i != *subject && current[i] > current[*subject]) {
          report.frozen_overtaken_at = step;
          break;
        }
      }
    }
  }

  // Per-model results.
  const std::int64_t steady_len = std::max<std::int64_t>(
      1, std::llround(scenario.steady_fraction * static_cast<double>(n_votes)));
  const std::size_t steady_from = static_cast<std::size_t>(n_votes - steady_len);
  auto board = pipeline.Current(track);
  std::map<std::string, std::size_t> rank_of;
  for (const LeaderboardRow& row : board->rows) rank_of[row.model_id] = static_cast<std::size_t>(row.rank);

  std::vector<double> ratings, skills;
  for (std::size_t i = 0; i < m_count; ++i) {
    ModelResult r;
    r.id = scenario.models[i].id;
    r.final_skill = scenario.models[i].SkillAt(n_votes - 1);
    r.final_rating = current[i];
    r.match_count = pipeline.RatingOf(track, r.id).value().match_count;
    r.rank = rank_of.at(r.id);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = steady_from; t < full[i].size(); ++t) {
      if (!std::isnan(full[i][t])) {
        sum += full[i][t];
        ++count;
      }
    }
    r.steady_mean = count > 0 ? sum / static_cast<double>(count) : r.final_rating;
    if (std::abs(scenario.params.base_rating - r.steady_mean) <= scenario.band) {
      r.steps_to_band = 0;
    } else {
      r.steps_to_band = r.match_count + 1;
      for (std::size_t k = 0; k < own[i].size(); ++k) {
        if (std::abs(own[i][k] - r.steady_mean) <= scenario.band) {
          r.steps_to_band = static_cast<std::int64_t>(k) + 1;
          break;
        }
      }
    }
    ratings.push_back(r.final_rating);
    skills.push_back(r.final_skill);
    report.models.push_back(r);
  }
  report.spearman = SpearmanRho(ratings, skills);
  report.log_records = log->size();
  report.final_mean_rating =
      std::accumulate(ratings.begin(), ratings.end(), 0.0) / static_cast<double>(ratings.size());

  switch (scenario.kind) {
    case ScenarioKind::kStandard:
      report.final_mean_rating.reset();
      break;
    case ScenarioKind::kLateJoiner:
      report.final_mean_rating.reset();
      report.joiner_steps_to_band = report.models[*subject].steps_to_band;
      break;
    case ScenarioKind::kOversampledPair: {
      report.final_mean_rating.reset();
      double total = 0.0;
      for (std::size_t i : {scenario.forced_pair->a, scenario.forced_pair->b}) {
        std::vector<double> tail(full[i].end() - scenario.tail_window, full[i].end());
        total += PopulationVariance(tail);
      }
      report.pair_tail_variance = total / 2.0;
      break;
    }
    case ScenarioKind::kInactiveLeader: {
      const std::size_t s = *subject;
      const auto freeze = static_cast<std::size_t>(
          std::min<std::int64_t>(*scenario.models[s].active_until, n_votes) - 1);
      report.frozen_rating_at_freeze = full[s][freeze];
      report.frozen_final_rating = current[s];
      report.frozen_final_rank = report.models[s].rank;
      break;
    }
  }

  // Sampled trajectories.
  const std::int64_t stride = scenario.trajectory_stride > 0
                                  ? scenario.trajectory_stride
                                  : std::max<std::int64_t>(1, n_votes / 100);
  for (std::int64_t t = stride - 1; t < n_votes; t += stride) report.trajectory_steps.push_back(t);
  if (report.trajectory_steps.empty() || report.trajectory_steps.back() != n_votes - 1) {
    report.trajectory_steps.push_back(n_votes - 1);
  }
  report.trajectories.assign(m_count, {});
  for (std::size_t i = 0; i < m_count; ++i) {
    for (std::int64_t t : report.trajectory_steps) {
      report.trajectories[i].push_back(full[i][static_cast<std::size_t>(t)]);
    }
  }

  if (timing != nullptr) {
    timing->latency = pipeline.Latency(track);
    timing->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  }
  return report;
}

json SimReport::ToJson() const {
  json models_json = json::array();
  for (const ModelResult& m : models) {
    models_json.push_back({{"id", m.id},
                           {"final_skill", m.final_skill},
                           {"final_rating", m.final_rating},
                           {"match_count", m.match_count},
                           {"rank", m.rank},
                           {"steady_mean", m.steady_mean},
                           {"steps_to_band", m.steps_to_band}});
  }
  json study = json::object();
  study["metric"] = StudyMetricName(scenario.kind);
  study["value"] = StudyMetric(*this);
  if (joiner_steps_to_band) study["joiner_steps_to_band"] = *joiner_steps_to_band;
  if (pair_tail_variance) study["pair_tail_variance"] = *pair_tail_variance;
  if (frozen_final_rank) study["frozen_final_rank"] = *frozen_final_rank;
  if (frozen_rating_at_freeze) study["frozen_rating_at_freeze"] = *frozen_rating_at_freeze;
  if (frozen_final_rating) study["frozen_final_rating"] = *frozen_final_rating;
  if (final_mean_rating) study["final_mean_rating"] = *final_mean_rating;
  if (frozen_overtaken_at) study["frozen_overtaken_at"] = *frozen_overtaken_at;

  json ticks_json = json::array();
  for (const TickRecord& t : ticks) {
    ticks_json.push_back({{"after_vote", t.after_vote},
                          {"mean_before", t.mean_before},
                          {"subject_before", t.subject_before},
                          {"subject_after", t.subject_after},
                          {"subject_regressed", t.subject_regressed}});
  }
  json series = json::object();
  for (std::size_t i = 0; i < models.size(); ++i) {
    json points = json::array();
    for (double v : trajectories[i]) points.push_back(NumberOrNull(v));
    series[models[i].id] = points;
  }
  return {{"scenario", scenario.ToJson()},
          {"models", models_json},
          {"spearman", spearman},
          {"votes_applied", votes_applied},
          {"ticks_applied", ticks_applied},
          {"log_records", log_records},
          {"study", study},
          {"ticks", ticks_json},
          {"trajectory", {{"steps", trajectory_steps}, {"ratings", series}}}};
}

void SimReport::WriteTrajectoryCsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ArenaError(ErrorCode::kIngest, "cannot write " + path.string());
  out << "step";
  for (const ModelResult& m : models) out << ',' << m.id;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < trajectory_steps.size(); ++k) {
    out << trajectory_steps[k];
    for (std::size_t i = 0; i < models.size(); ++i) {
      out << ',';
      if (!std::isnan(trajectories[i][k])) out << trajectories[i][k];
    }
    out << '\n';
  }
}

std::string_view StudyMetricName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStandard:
      return "spearman_rho";
    case ScenarioKind::kLateJoiner:
      return "joiner_steps_to_band";
    case ScenarioKind::kOversampledPair:
      return "pair_tail_variance";
    case ScenarioKind::kInactiveLeader:
      return "frozen_final_rank";
  }
  return "spearman_rho";
}

double StudyMetric(const SimReport& report) {
  switch (report.scenario.kind) {
    case ScenarioKind::kStandard:
      return report.spearman;
    case ScenarioKind::kLateJoiner:
      return static_cast<double>(report.joiner_steps_to_band.value_or(0));
    case ScenarioKind::kOversampledPair:
      return report.pair_tail_variance.value_or(0.0);
    case ScenarioKind::kInactiveLeader:
      return static_cast<double>(report.frozen_final_rank.value_or(0));
  }
  return 0.0;
}

void SetParam(RatingParams& params, std::string_view name, double value) {
  if (name == "alpha") {
    params.cold_start_alpha = value;
  } else if (name == "gamma") {
    params.pair_decay_gamma = value;
  } else if (name == "lambda") {
    params.regression_lambda = value;
  } else if (name == "k") {
    params.k_factor = value;
  } else if (name == "window") {
    params.cold_start_window = std::llround(value);
  } else if (name == "base") {
    params.base_rating = value;
  } else {
    throw ArenaError(ErrorCode::kValidation,
                     "unknown parameter " + std::string(name) +
                         " (expected alpha, gamma, lambda, k, window or base)");
  }
}

Comparison CompareParams(const SimScenario& scenario, const std::string& param,
                         const std::vector<double>& values, std::size_t replicates) {
  if (values.size() < 2) throw ArenaError(ErrorCode::kValidation, "compare needs at least two values");
  if (replicates == 0) throw ArenaError(ErrorCode::kValidation, "compare needs at least one seed");
  Comparison c;
  c.kind = scenario.kind;
  c.param = param;
  for (std::size_t r = 0; r < replicates; ++r) c.seeds.push_back(scenario.seed + r);
  for (double value : values) {
    VariantResult v;
    v.value = value;
    SimScenario variant = scenario;
    SetParam(variant.params, param, value);
    for (std::uint64_t seed : c.seeds) {
      variant.seed = seed;
      v.metrics.push_back(StudyMetric(RunScenario(variant)));
    }
    v.median = Median(v.metrics);
    c.variants.push_back(std::move(v));
  }
  return c;
}

json Comparison::ToJson() const {
  json variants_json = json::array();
  for (const VariantResult& v : variants) {
    variants_json.push_back({{"value", v.value}, {"median", v.median}, {"metrics", v.metrics}});
  }
  return {{"kind", ScenarioKindName(kind)},
          {"param", param},
          {"metric", StudyMetricName(kind)},
          {"seeds", seeds},
          {"variants", variants_json}};
}

json LoadReport::ToJson() const {
  return {{"votes_sent", votes_sent},
          {"votes_applied", votes_applied},
          {"rejected", rejected},
          {"wall_seconds", wall_seconds},
          {"achieved_rate", achieved_rate},
          {"latency", LatencyToJson(latency)},
          {"max_queue_depth", max_queue_depth},
          {"queue_capacity", queue_capacity}};
}

LoadReport RunLoad(const LoadOptions& options) {
  if (!(options.votes_per_second > 0.0) || options.producers == 0 || options.model_count < 2) {
    throw ArenaError(ErrorCode::kValidation,
                     "load needs a positive rate, a producer and two models");
  }
  SystemClock clock;
  std::unique_ptr<EventLog> log;
  if (options.log_path.empty()) {
    log = EventLog::InMemory();
  } else {
    LogOptions log_options;
    log_options.sync = options.sync;
    log_options.batch_window = options.batch_window;
    log = EventLog::OpenFile(options.log_path, log_options);
  }
  PipelineOptions pipeline_options;
  pipeline_options.queue_capacity = options.queue_capacity;
  pipeline_options.backpressure = BackpressureMode::kReject;
  EventPipeline pipeline(*log, UniformParams(), clock, pipeline_options);
  ProviderGateway gateway;
  EngineOptions engine_options;
  engine_options.seed = options.seed;
  ArenaEngine engine(pipeline, gateway, clock, InlineRunner(), engine_options);

  const std::string prefix = "load-" + std::to_string(options.seed) + "-";
  for (const SimModel& m : SimScenario::SpacedModels(options.model_count, 50.0)) {
    if (!pipeline.IsRegistered(prefix + m.id)) {
      engine.RegisterModel(prefix + m.id, {options.track}, ProviderDescriptor::Fixture());
    }
  }
  pipeline.Drain();
  pipeline.ResetStats(options.track);

  std::atomic<std::int64_t> sent{0}, rejected{0};
  const auto interval = std::chrono::duration<double>(
      static_cast<double>(options.producers) / options.votes_per_second);
  const auto start = std::chrono::steady_clock::now();
  const auto end = start + options.duration;
  std::mutex error_mu;
  std::exception_ptr error;
  auto produce = [&](std::size_t p) {
    SplitMix64 rng(options.seed * 1000003 + p);
    // Producers are staggered inside one interval.
    const auto offset =
        interval * (static_cast<double>(p) / static_cast<double>(options.producers));
    for (std::int64_t i = 0;; ++i) {
      const auto target =
          start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      offset + interval * static_cast<double>(i));
      if (target >= end) break;
      std::this_thread::sleep_until(target);
      Battle battle = engine.CreateBattle(options.track, "load prompt", rng.Next());
      try {
        engine.CastVote(battle.battle_id,
                        (rng.Next() & 1) ? VoteChoice::kLeft : VoteChoice::kRight,
                        "load-voter");
        ++sent;
      } catch (const ArenaError& e) {
        if (e.code() != ErrorCode::kBackpressure) throw;
        ++rejected;
      }
    }
  };
  std::vector<std::thread> producers;
  for (std::size_t p = 0; p < options.producers; ++p) {
    producers.emplace_back([&, p] {
      try {
        produce(p);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : producers) t.join();
  if (error) std::rethrow_exception(error);
  const double producing =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pipeline.Drain();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  LoadReport report;
  report.votes_sent = sent.load();
  report.rejected = rejected.load();
  report.latency = pipeline.Latency(options.track);
  report.votes_applied = static_cast<std::int64_t>(report.latency.count);
  report.wall_seconds = wall;
  report.achieved_rate = static_cast<double>(report.votes_sent) / producing;
  report.max_queue_depth = pipeline.MaxQueueDepth(options.track);
  report.queue_capacity = options.queue_capacity;
  return report;
}

}  // namespace arena::sim
