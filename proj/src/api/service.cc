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

#include "arena/api/service.h"

#include <iostream>
#include <random>
#include <vector>

#include "arena/core/errors.h"

namespace arena {

using nlohmann::json;

namespace {

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = path.find('/', start);
    const std::string part =
        path.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!part.empty()) parts.push_back(part);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

ApiResponse Error(ErrorCode code, const std::string& message) {
  return {HttpStatusFor(code),
          {{"code", ErrorCodeName(code)}, {"message", message}}};
}

json ParseBody(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) {
      throw ArenaError(ErrorCode::kValidation, "request body must be a JSON object");
    }
    return j;
  } catch (const json::parse_error& e) {
    throw ArenaError(ErrorCode::kValidation,
                     std::string("request body is not JSON: ") + e.what());
  }
}

std::string RequiredString(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    throw ArenaError(ErrorCode::kValidation, std::string(key) + " must be a nonempty string");
  }
  return it->get<std::string>();
}

Track RequiredTrack(const std::string& id, ErrorCode code) {
  auto track = ParseTrack(id);
  if (!track) throw ArenaError(code, "unknown track " + id);
  return *track;
}

json AckToJson(const Ack& ack) {
  json j = {{"event_id", ack.event_id},
            {"kind", EventKindName(ack.kind)},
            {"seq", ack.seq}};
  if (ack.track) j["track"] = TrackId(*ack.track);
  return j;
}

std::uint64_t RandomSeed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return 400;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kProvider: return 502;
    case ErrorCode::kArenaNotReady:
    case ErrorCode::kBackpressure:
    case ErrorCode::kIngest: return 503;
    case ErrorCode::kCorruption: return 500;
  }
  return 500;
}

json SnapshotToJson(const LeaderboardSnapshot& snapshot) {
  json rows = json::array();
  for (const LeaderboardRow& row : snapshot.rows) {
    rows.push_back({{"rank", row.rank},
                    {"model_id", row.model_id},
                    {"rating", row.rating},
                    {"match_count", row.match_count},
                    {"is_cold_start", row.is_cold_start}});
  }
  return {{"track", TrackId(snapshot.track)},
          {"version", snapshot.version},
          {"produced_by_seq", snapshot.produced_by_seq},
          {"rows", std::move(rows)}};
}

ArenaService::ArenaService(ApiConfig config, const Clock* clock)
    : config_(std::move(config)),
      clock_(clock ? *clock : system_clock_),
      fetch_pool_(config_.fetch_threads) {
  config_.Validate();
  if (config_.log_path.empty()) {
    std::cerr << "[arena] warning: no log_path configured; events are kept in "
                 "memory only\n";
    log_ = EventLog::InMemory();
  } else {
    log_ = EventLog::OpenFile(config_.log_path, {config_.sync_policy});
  }
  if (!config_.snapshot_dir.empty()) {
    snapshots_ = std::make_unique<SnapshotStore>(config_.snapshot_dir);
  }
  PipelineOptions options;
  options.queue_capacity = config_.queue_capacity;
  options.backpressure = config_.backpressure;
  pipeline_ = std::make_unique<EventPipeline>(*log_, config_.rating_params, clock_,
                                              options, snapshots_.get());
  EngineOptions engine_options;
  engine_options.tie_enabled = config_.tie_enabled;
  engine_options.battle_ttl = config_.battle_ttl;
  engine_options.seed = RandomSeed();
  engine_ = std::make_unique<ArenaEngine>(*pipeline_, gateway_, clock_,
                                          fetch_pool_.AsRunner(), engine_options);
  maintenance_ = std::thread([this] { MaintenanceLoop(); });
}

ArenaService::~ArenaService() {
  {
    std::lock_guard<std::mutex> lock(maintenance_mu_);
    stopping_ = true;
  }
  maintenance_cv_.notify_all();
  maintenance_.join();
  engine_.reset();
  if (snapshots_) {
    try {
      pipeline_->WriteStateSnapshot(*snapshots_);
    } catch (const std::exception& e) {
      std::cerr << "[arena] final snapshot failed: " << e.what() << "\n";
    }
  }
  pipeline_->Stop();
}

void ArenaService::MaintenanceLoop() {
  using std::chrono::steady_clock;
  const auto expire_every = std::chrono::seconds(30);
  auto next_tick = steady_clock::now() + config_.regression_tick_interval;
  auto next_expire = steady_clock::now() + expire_every;
  auto next_snapshot = steady_clock::now() + config_.snapshot_interval;
  std::unique_lock<std::mutex> lock(maintenance_mu_);
  while (!stopping_) {
    auto wake = std::min(next_tick, next_expire);
    if (snapshots_) wake = std::min(wake, next_snapshot);
    maintenance_cv_.wait_until(lock, wake, [&] { return stopping_; });
    if (stopping_) break;
    lock.unlock();
    const auto now = steady_clock::now();
    try {
      if (now >= next_tick) {
        InjectRegressionTick();
        next_tick = now + config_.regression_tick_interval;
      }
      if (now >= next_expire) {
        engine_->ExpireStale();
        next_expire = now + expire_every;
      }
      if (snapshots_ && now >= next_snapshot) {
        pipeline_->WriteStateSnapshot(*snapshots_);
        next_snapshot = now + config_.snapshot_interval;
      }
    } catch (const std::exception& e) {
      std::cerr << "[arena] maintenance: " << e.what() << "\n";
    }
    lock.lock();
  }
}

Ack ArenaService::InjectRegressionTick(std::optional<Timestamp> as_of) {
  std::string id;
  {
    std::lock_guard<std::mutex> lock(tick_mu_);
    id = "tick-" + FormatRfc3339(clock_.Now()) + "-" + std::to_string(++tick_counter_) +
         "-" + HexId(RandomSeed()).substr(0, 8);
  }
  return pipeline_->Enqueue(ArenaEvent::RegressionTick(std::move(id), as_of));
}

bool ArenaService::Healthy() const {
  return pipeline_->WorkersAlive() && log_->Healthy();
}

ApiResponse ArenaService::Handle(const ApiRequest& request) {
  try {
    return Route(request);
  } catch (const ArenaError& e) {
    return Error(e.code(), e.what());
  } catch (const json::exception& e) {
    return Error(ErrorCode::kValidation, e.what());
  } catch (const std::exception& e) {
    return {500, {{"code", "internal"}, {"message", e.what()}}};
  }
}

ApiResponse ArenaService::Route(const ApiRequest& request) {
  const std::vector<std::string> parts = SplitPath(request.path);
  const std::string& method = request.method;
  auto is = [&](std::initializer_list<const char*> expected) {
    if (parts.size() != expected.size()) return false;
    std::size_t i = 0;
    for (const char* e : expected) {
      if (std::string(e) != "*" && parts[i] != e) return false;
      ++i;
    }
    return true;
  };

  if (is({"healthz"}) && method == "GET") return Health();
  if (is({"tracks"}) && method == "GET") return Tracks();
  if (is({"battles"}) && method == "POST") return CreateBattle(ParseBody(request.body));
  if (is({"battles", "*"}) && method == "GET") return GetBattle(parts[1]);
  if (is({"battles", "*", "vote"}) && method == "POST") {
    return Vote(parts[1], ParseBody(request.body));
  }
  if (is({"leaderboard", "*"}) && method == "GET") return GetLeaderboard(parts[1], request);
  if (is({"models"}) && method == "POST") {
    RequireAdmin(request);
    return RegisterModel(ParseBody(request.body));
  }
  if (is({"admin", "regression-tick"}) && method == "POST") {
    RequireAdmin(request);
    return AdminTick(ParseBody(request.body));
  }
  throw ArenaError(ErrorCode::kNotFound, "no route for " + method + " " + request.path);
}

void ArenaService::RequireAdmin(const ApiRequest& request) const {
  if (config_.admin_token.empty()) return;
  auto it = request.headers.find("authorization");
  if (it == request.headers.end() || it->second != "Bearer " + config_.admin_token) {
    throw ArenaError(ErrorCode::kUnauthorized, "missing or wrong bearer token");
  }
}

ApiResponse ArenaService::Health() const {
  const bool workers = pipeline_->WorkersAlive();
  const bool log_ok = log_->Healthy();
  return {workers && log_ok ? 200 : 503,
          {{"status", workers && log_ok ? "ok" : "unhealthy"},
           {"workers_alive", workers},
           {"log_writable", log_ok},
           {"log_records", log_->size()}}};
}

ApiResponse ArenaService::Tracks() const {
  json tracks = json::array();
  for (Track t : kAllTracks) {
    tracks.push_back({{"id", TrackId(t)}, {"display_name", TrackDisplayName(t)}});
  }
  return {200, {{"tracks", std::move(tracks)}, {"tie_enabled", config_.tie_enabled}}};
}

ApiResponse ArenaService::CreateBattle(const json& body) {
  const Track track = RequiredTrack(RequiredString(body, "track"), ErrorCode::kValidation);
  auto prompt = body.find("prompt");
  if (prompt == body.end() || !prompt->is_string()) {
    throw ArenaError(ErrorCode::kValidation, "prompt must be a string");
  }
  std::optional<std::uint64_t> seed;
  if (auto it = body.find("seed"); it != body.end()) {
    if (!it->is_number_unsigned()) {
      throw ArenaError(ErrorCode::kValidation, "seed must be a nonnegative integer");
    }
    seed = it->get<std::uint64_t>();
  }
  Battle battle = engine_->CreateBattle(track, prompt->get<std::string>(), seed);
  return {201, VoterView(battle, config_.tie_enabled)};
}

ApiResponse ArenaService::GetBattle(const std::string& id) {
  auto battle = engine_->GetBattle(id);
  if (!battle) throw ArenaError(ErrorCode::kNotFound, "unknown battle " + id);
  return {200, VoterView(*battle, config_.tie_enabled)};
}

ApiResponse ArenaService::Vote(const std::string& id, const json& body) {
  const std::string choice_text = RequiredString(body, "choice");
  auto choice = ParseVoteChoice(choice_text);
  if (!choice) {
    throw ArenaError(ErrorCode::kValidation, "choice must be left, right or tie");
  }
  const std::string voter = RequiredString(body, "voter_id");
  std::optional<std::string> event_id;
  if (body.contains("event_id")) event_id = RequiredString(body, "event_id");
  VoteReceipt receipt = engine_->CastVote(id, *choice, voter, event_id);
  return {202,
          {{"event_id", receipt.ack.event_id},
           {"seq", receipt.ack.seq},
           {"track", TrackId(receipt.battle.track)},
           {"battle_id", receipt.battle.battle_id},
           {"score_left", receipt.battle.outcome.score_a()},
           {"revealed",
            {{"left", receipt.battle.candidate_left},
             {"right", receipt.battle.candidate_right}}}}};
}

ApiResponse ArenaService::GetLeaderboard(const std::string& track_id,
                                         const ApiRequest& request) {
  const Track track = RequiredTrack(track_id, ErrorCode::kNotFound);
  if (auto it = request.query.find("version"); it != request.query.end()) {
    std::uint64_t version = 0;
    try {
      version = std::stoull(it->second);
    } catch (const std::exception&) {
      throw ArenaError(ErrorCode::kValidation, "version must be an integer");
    }
    auto snapshot = pipeline_->SnapshotAt(track, version);
    if (!snapshot) {
      throw ArenaError(ErrorCode::kNotFound,
                       "version " + it->second + " is not retained");
    }
    return {200, SnapshotToJson(*snapshot)};
  }
  return {200, SnapshotToJson(*pipeline_->Current(track))};
}

ApiResponse ArenaService::RegisterModel(const json& body) {
  const std::string model_id = RequiredString(body, "model_id");
  auto tracks_it = body.find("tracks");
  if (tracks_it == body.end() || !tracks_it->is_array()) {
    throw ArenaError(ErrorCode::kValidation, "tracks must be an array");
  }
  std::vector<Track> tracks;
  for (const json& t : *tracks_it) {
    if (!t.is_string()) throw ArenaError(ErrorCode::kValidation, "track ids are strings");
    tracks.push_back(RequiredTrack(t.get<std::string>(), ErrorCode::kValidation));
  }
  ProviderDescriptor provider = ProviderDescriptor::Fixture();
  if (auto it = body.find("provider"); it != body.end()) {
    provider = ProviderDescriptor::FromJson(*it);
  }
  std::vector<Ack> acks = engine_->RegisterModel(model_id, tracks, provider);
  json ack_list = json::array();
  json track_list = json::array();
  for (const Ack& ack : acks) {
    ack_list.push_back(AckToJson(ack));
    track_list.push_back(TrackId(*ack.track));
  }
  return {201, {{"model_id", model_id},
                {"tracks", std::move(track_list)},
                {"provider", provider.ToJson()},
                {"acks", std::move(ack_list)}}};
}

ApiResponse ArenaService::AdminTick(const json& body) {
  std::optional<Timestamp> as_of;
  if (auto it = body.find("as_of"); it != body.end()) {
    if (!it->is_string()) throw ArenaError(ErrorCode::kValidation, "as_of must be a string");
    as_of = ParseRfc3339(it->get<std::string>());
    if (!as_of) throw ArenaError(ErrorCode::kValidation, "as_of must be RFC 3339");
  }
  return {202, AckToJson(InjectRegressionTick(as_of))};
}

}  // namespace arena
