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

#include "arena/pipeline/arena_state.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "arena/core/errors.h"

namespace arena {
namespace {

using nlohmann::json;

std::vector<std::pair<std::string, RatingState>> Flatten(
    const std::map<std::string, ModelRecord>& models) {
  std::vector<std::pair<std::string, RatingState>> out;
  out.reserve(models.size());
  for (const auto& [id, record] : models) out.emplace_back(id, record.state);
  return out;
}

Timestamp TimeFromJson(const json& j) {
  auto t = ParseRfc3339(j.get<std::string>());
  if (!t) throw std::invalid_argument("bad timestamp");
  return *t;
}

}  // namespace

TrackParamsTable UniformParams(const RatingParams& params) {
  TrackParamsTable table;
  table.fill(params);
  return table;
}

TrackState::TrackState(Track track, RatingParams params, std::size_t retention)
    : track_(track), params_(params), leaderboard_(track, retention) {}

AppliedUpdate TrackState::Apply(const ArenaEvent& event) {
  AppliedUpdate out;
  out.event_id = event.event_id;
  out.kind = event.kind;
  out.track = track_;
  out.seq = event.seq;
  switch (event.kind) {
    case EventKind::kVote:
      last_seq_ = event.seq;
      ApplyVote(event, &out);
      break;
    case EventKind::kRegistration:
      last_seq_ = event.seq;
      ApplyRegistration(event, &out);
      break;
    case EventKind::kRegressionTick:
      ApplyTick(event, &out);
      break;
  }
  if (out.dead_letter_reason) {
    dead_letters_.push_back(
        DeadLetter{event.event_id, event.kind, event.seq, *out.dead_letter_reason});
  }
  Publish(&out);
  return out;
}

void TrackState::ApplyVote(const ArenaEvent& event, AppliedUpdate* out) {
  const VotePayload& vote = event.vote();
  auto it_a = models_.find(vote.model_a);
  auto it_b = models_.find(vote.model_b);
  if (it_a == models_.end() || it_b == models_.end()) {
    const std::string& missing =
        it_a == models_.end() ? vote.model_a : vote.model_b;
    out->dead_letter_reason = "unknown model " + missing;
    return;
  }
  const std::int64_t n_ab = pairs_.Count(vote.model_a, vote.model_b);
  UpdateResult result;
  try {
    result = ApplyUpdate(it_a->second.state, it_b->second.state, vote.outcome,
                         n_ab, params_);
  } catch (const std::domain_error& e) {
    out->dead_letter_reason = std::string("rating domain error: ") + e.what();
    return;
  }
  for (auto [it, rating] : {std::pair{it_a, result.new_rating_a},
                            std::pair{it_b, result.new_rating_b}}) {
    ModelRecord& record = it->second;
    record.state.rating = rating;
    record.state.match_count += 1;
    record.state.last_match_seq = event.seq;
    record.last_active_at = event.enqueued_at;
  }
  pairs_.Increment(vote.model_a, vote.model_b);
  out->update = result;
}

void TrackState::ApplyRegistration(const ArenaEvent& event,
                                   AppliedUpdate* out) {
  const RegistrationPayload& reg = event.registration();
  if (models_.count(reg.model_id) != 0) {
    out->dead_letter_reason = "model " + reg.model_id + " already registered";
    return;
  }
  ModelRecord record;
  record.state.rating = params_.base_rating;
  record.last_active_at = event.enqueued_at;
  models_.emplace(reg.model_id, record);
}

void TrackState::ApplyTick(const ArenaEvent& event, AppliedUpdate* out) {
  if (models_.empty()) return;
  const Timestamp as_of = event.tick().as_of.value_or(event.enqueued_at);
  // The mean is fixed before anyone moves, so the result does not depend on
  // the order models are visited in.
  double sum = 0.0;
  for (const auto& [id, record] : models_) sum += record.state.rating;
  const double mean = sum / static_cast<double>(models_.size());
  for (auto& [id, record] : models_) {
    if (as_of - record.last_active_at <= params_.inactivity_threshold) continue;
    try {
      record.state.rating = RegressTowardMean(record.state.rating, mean,
                                              params_.regression_lambda);
    } catch (const std::domain_error& e) {
      out->dead_letter_reason = std::string("rating domain error: ") + e.what();
      return;
    }
    out->regressed.push_back(id);
  }
}

void TrackState::Publish(AppliedUpdate* out) {
  auto snapshot = leaderboard_.Publish(Flatten(models_), params_, last_seq_);
  out->snapshot_version = snapshot->version;
}

json TrackState::ToJson() const {
  json models = json::array();
  for (const auto& [id, record] : models_) {
    json m;
    m["model_id"] = id;
    m["rating"] = record.state.rating;
    m["match_count"] = record.state.match_count;
    if (record.state.last_match_seq) {
      m["last_match_seq"] = *record.state.last_match_seq;
    }
    m["last_active_at"] = FormatRfc3339(record.last_active_at);
    models.push_back(std::move(m));
  }
  json pairs = json::array();
  for (const auto& [key, count] : pairs_.counts()) {
    pairs.push_back(json::array({key.first, key.second, count}));
  }
  json dead = json::array();
  for (const auto& d : dead_letters_) {
    dead.push_back({{"event_id", d.event_id},
                    {"kind", EventKindName(d.kind)},
                    {"seq", d.seq},
                    {"reason", d.reason}});
  }
  const auto current = leaderboard_.Current();
  return {{"track", TrackId(track_)},
          {"last_seq", last_seq_},
          {"models", std::move(models)},
          {"pairs", std::move(pairs)},
          {"dead_letters", std::move(dead)},
          {"leaderboard_version", current->version},
          {"leaderboard_seq", current->produced_by_seq}};
}

TrackState TrackState::FromJson(const json& j, RatingParams params,
                                std::size_t retention) {
  auto track = ParseTrack(j.at("track").get<std::string>());
  if (!track) throw std::invalid_argument("unknown track in snapshot");
  TrackState state(*track, params, retention);
  state.last_seq_ = j.at("last_seq").get<std::uint64_t>();
  for (const auto& m : j.at("models")) {
    ModelRecord record;
    record.state.rating = m.at("rating").get<double>();
    record.state.match_count = m.at("match_count").get<std::int64_t>();
    if (m.contains("last_match_seq")) {
      record.state.last_match_seq = m.at("last_match_seq").get<std::uint64_t>();
    }
    record.last_active_at = TimeFromJson(m.at("last_active_at"));
    state.models_.emplace(m.at("model_id").get<std::string>(), record);
  }
  for (const auto& p : j.at("pairs")) {
    state.pairs_.Set(p.at(0).get<std::string>(), p.at(1).get<std::string>(),
                     p.at(2).get<std::int64_t>());
  }
  for (const auto& d : j.at("dead_letters")) {
    auto kind = ParseEventKind(d.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown dead letter kind");
    state.dead_letters_.push_back(DeadLetter{d.at("event_id").get<std::string>(),
                                             *kind, d.at("seq").get<std::uint64_t>(),
                                             d.at("reason").get<std::string>()});
  }
  auto snapshot = std::make_shared<LeaderboardSnapshot>();
  snapshot->track = *track;
  snapshot->version = j.at("leaderboard_version").get<std::uint64_t>();
  snapshot->produced_by_seq = j.at("leaderboard_seq").get<std::uint64_t>();
  snapshot->rows = RankRows(Flatten(state.models_), params);
  snapshot->checksum = ComputeChecksum(*snapshot);
  state.leaderboard_.Restore(std::move(snapshot));
  return state;
}

bool TrackState::operator==(const TrackState& other) const {
  const auto& mine = *leaderboard_.Current();
  const auto& theirs = *other.leaderboard_.Current();
  return track_ == other.track_ && params_ == other.params_ &&
         models_ == other.models_ && pairs_ == other.pairs_ &&
         last_seq_ == other.last_seq_ && dead_letters_ == other.dead_letters_ &&
         mine.version == theirs.version &&
         mine.produced_by_seq == theirs.produced_by_seq &&
         mine.rows == theirs.rows;
}

std::uint64_t IngestState::NextSeq(const ArenaEvent& event) const {
  if (event.kind == EventKind::kRegressionTick) return global_seq + 1;
  return track_seq[TrackIndex(*event.track)] + 1;
}

void IngestState::Admit(const ArenaEvent& event, const Ack& ack) {
  if (event.kind == EventKind::kRegressionTick) {
    global_seq = event.seq;
  } else {
    track_seq[TrackIndex(*event.track)] = event.seq;
  }
  acks.emplace(event.event_id, ack);
  if (event.kind == EventKind::kVote) {
    battle_votes.emplace(event.vote().battle_id, event.event_id);
  }
  if (event.kind == EventKind::kRegistration) {
    const auto& reg = event.registration();
    auto& entry = registry[reg.model_id];
    entry.provider = reg.provider;
    for (Track t : reg.tracks) {
      if (std::find(entry.tracks.begin(), entry.tracks.end(), t) ==
          entry.tracks.end()) {
        entry.tracks.push_back(t);
      }
    }
  }
}

std::vector<std::string> IngestState::ModelsInTrack(Track track) const {
  std::vector<std::string> out;
  for (const auto& [id, reg] : registry) {
    if (std::find(reg.tracks.begin(), reg.tracks.end(), track) !=
        reg.tracks.end()) {
      out.push_back(id);
    }
  }
  return out;
}

json IngestState::ToJson() const {
  json seqs = json::object();
  for (Track t : kAllTracks) seqs[std::string(TrackId(t))] = track_seq[TrackIndex(t)];
  // Sorted so that identical states serialize identically.
  std::map<std::string, const Ack*> sorted_acks;
  for (const auto& [id, ack] : acks) sorted_acks.emplace(id, &ack);
  json ack_list = json::array();
  for (const auto& [id, ack] : sorted_acks) {
    json a = {{"event_id", id},
              {"kind", EventKindName(ack->kind)},
              {"seq", ack->seq},
              {"log_position", ack->log_position}};
    if (ack->track) a["track"] = TrackId(*ack->track);
    ack_list.push_back(std::move(a));
  }
  std::map<std::string, std::string> sorted_votes(battle_votes.begin(),
                                                  battle_votes.end());
  json registry_json = json::object();
  for (const auto& [id, reg] : registry) {
    json tracks = json::array();
    for (Track t : reg.tracks) tracks.push_back(TrackId(t));
    registry_json[id] = {{"tracks", std::move(tracks)}, {"provider", reg.provider}};
  }
  return {{"track_seq", std::move(seqs)},
          {"global_seq", global_seq},
          {"acks", std::move(ack_list)},
          {"battle_votes", sorted_votes},
          {"registry", std::move(registry_json)}};
}

IngestState IngestState::FromJson(const json& j) {
  IngestState state;
  for (Track t : kAllTracks) {
    state.track_seq[TrackIndex(t)] =
        j.at("track_seq").at(std::string(TrackId(t))).get<std::uint64_t>();
  }
  state.global_seq = j.at("global_seq").get<std::uint64_t>();
  for (const auto& a : j.at("acks")) {
    Ack ack;
    ack.event_id = a.at("event_id").get<std::string>();
    auto kind = ParseEventKind(a.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown ack kind");
    ack.kind = *kind;
    if (a.contains("track")) ack.track = ParseTrack(a.at("track").get<std::string>());
    ack.seq = a.at("seq").get<std::uint64_t>();
    ack.log_position = a.at("log_position").get<std::uint64_t>();
    state.acks.emplace(ack.event_id, ack);
  }
  for (const auto& [battle, event_id] : j.at("battle_votes").items()) {
    state.battle_votes.emplace(battle, event_id.get<std::string>());
  }
  for (const auto& [id, reg] : j.at("registry").items()) {
    ModelRegistration entry;
    for (const auto& t : reg.at("tracks")) {
      auto track = ParseTrack(t.get<std::string>());
      if (!track) throw std::invalid_argument("unknown track in registry");
      entry.tracks.push_back(*track);
    }
    entry.provider = reg.at("provider");
    state.registry.emplace(id, std::move(entry));
  }
  return state;
}

ArenaState ArenaState::Empty(const TrackParamsTable& params,
                             std::size_t retention) {
  ArenaState state;
  state.tracks.reserve(kTrackCount);
  for (Track t : kAllTracks) {
    state.tracks.emplace_back(t, params[TrackIndex(t)], retention);
  }
  return state;
}

json ArenaState::ToJson() const {
  json tracks_json = json::array();
  for (const auto& t : tracks) tracks_json.push_back(t.ToJson());
  return {{"log_position", log_position},
          {"ingest", ingest.ToJson()},
          {"tracks", std::move(tracks_json)}};
}

ArenaState ArenaState::FromJson(const json& j, const TrackParamsTable& params,
                                std::size_t retention) {
  try {
    ArenaState state;
    state.log_position = j.at("log_position").get<std::uint64_t>();
    state.ingest = IngestState::FromJson(j.at("ingest"));
    state.tracks.reserve(kTrackCount);
    for (Track t : kAllTracks) {
      const json& tj = j.at("tracks").at(TrackIndex(t));
      if (tj.at("track").get<std::string>() != TrackId(t)) {
        throw std::invalid_argument("tracks out of order in snapshot");
      }
      state.tracks.push_back(
          TrackState::FromJson(tj, params[TrackIndex(t)], retention));
    }
    return state;
  } catch (const ArenaError&) {
    throw;
  } catch (const std::exception& e) {
    throw ArenaError(ErrorCode::kCorruption,
                     std::string("unreadable state snapshot: ") + e.what());
  }
}

void ReplayInto(ArenaState& state, const std::vector<LogRecord>& records) {
  for (const LogRecord& record : records) {
    if (record.position != state.log_position) {
      throw ArenaError(ErrorCode::kCorruption,
                       "replay expected log position " +
                           std::to_string(state.log_position) + ", got " +
                           std::to_string(record.position));
    }
    ArenaEvent event = FromLogRecord(record.json);
    const std::string where = "log position " + std::to_string(record.position);
    if (state.ingest.acks.count(event.event_id) != 0) {
      throw ArenaError(ErrorCode::kCorruption,
                       "duplicate event_id " + event.event_id + " at " + where);
    }
    const std::uint64_t expected = state.ingest.NextSeq(event);
    if (event.seq != expected) {
      const std::string scope =
          event.track ? std::string(TrackId(*event.track)) : "global";
      throw ArenaError(ErrorCode::kCorruption,
                       std::string(event.seq < expected ? "duplicate" : "gap in") +
                           " seq at " + where + ": scope " + scope +
                           " expected " + std::to_string(expected) + ", found " +
                           std::to_string(event.seq));
    }
    Ack ack{event.event_id, event.kind, event.track, event.seq, record.position};
    state.ingest.Admit(event, ack);
    if (event.track) {
      state.track(*event.track).Apply(event);
    } else {
      for (auto& track : state.tracks) track.Apply(event);
    }
    state.log_position = record.position + 1;
  }
}

ArenaState Replay(const std::vector<LogRecord>& records,
                  const TrackParamsTable& params, std::size_t retention) {
  ArenaState state = ArenaState::Empty(params, retention);
  ReplayInto(state, records);
  return state;
}

}  // namespace arena
