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

#include "arena/pipeline/event.h"

#include <stdexcept>
#include <utility>

#include "arena/core/errors.h"

namespace arena {
namespace {

using nlohmann::json;

[[noreturn]] void Invalid(const std::string& what) {
  throw ArenaError(ErrorCode::kValidation, what);
}

Timestamp ReadTime(const json& j, const char* key) {
  const auto& text = j.at(key).get_ref<const std::string&>();
  auto t = ParseRfc3339(text);
  if (!t) throw std::invalid_argument(std::string("bad timestamp in ") + key);
  return *t;
}

Track ReadTrack(const std::string& id) {
  auto track = ParseTrack(id);
  if (!track) throw std::invalid_argument("unknown track " + id);
  return *track;
}

}  // namespace

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kVote:
      return "vote";
    case EventKind::kRegistration:
      return "registration";
    case EventKind::kRegressionTick:
      return "regression_tick";
  }
  return "unknown";
}

std::optional<EventKind> ParseEventKind(std::string_view name) {
  for (EventKind kind : {EventKind::kVote, EventKind::kRegistration,
                         EventKind::kRegressionTick}) {
    if (EventKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

ArenaEvent ArenaEvent::Vote(std::string event_id, Track track,
                            VotePayload vote) {
  ArenaEvent event;
  event.kind = EventKind::kVote;
  event.event_id = std::move(event_id);
  event.track = track;
  event.payload = std::move(vote);
  return event;
}

ArenaEvent ArenaEvent::Registration(std::string event_id, Track track,
                                    RegistrationPayload registration) {
  ArenaEvent event;
  event.kind = EventKind::kRegistration;
  event.event_id = std::move(event_id);
  event.track = track;
  event.payload = std::move(registration);
  return event;
}

ArenaEvent ArenaEvent::RegressionTick(std::string event_id,
                                      std::optional<Timestamp> as_of) {
  ArenaEvent event;
  event.kind = EventKind::kRegressionTick;
  event.event_id = std::move(event_id);
  event.payload = RegressionTickPayload{as_of};
  return event;
}

void ValidateEvent(const ArenaEvent& event) {
  if (event.event_id.empty()) Invalid("event_id must not be empty");
  switch (event.kind) {
    case EventKind::kVote: {
      if (!event.track) Invalid("vote events need a track");
      const auto* vote = std::get_if<VotePayload>(&event.payload);
      if (vote == nullptr) Invalid("vote event without vote payload");
      if (vote->battle_id.empty()) Invalid("vote needs a battle_id");
      if (vote->model_a.empty() || vote->model_b.empty()) {
        Invalid("vote needs both model ids");
      }
      if (vote->model_a == vote->model_b) {
        Invalid("vote models must differ");
      }
      break;
    }
    case EventKind::kRegistration: {
      if (!event.track) Invalid("registration events need a track");
      const auto* reg = std::get_if<RegistrationPayload>(&event.payload);
      if (reg == nullptr) Invalid("registration event without payload");
      if (reg->model_id.empty()) Invalid("registration needs a model_id");
      bool listed = false;
      for (Track t : reg->tracks) listed = listed || t == *event.track;
      if (!listed) Invalid("registration track missing from its track list");
      break;
    }
    case EventKind::kRegressionTick:
      if (event.track) Invalid("regression ticks are not track scoped");
      if (!std::holds_alternative<RegressionTickPayload>(event.payload)) {
        Invalid("regression tick without tick payload");
      }
      break;
  }
}

json ToLogRecord(const ArenaEvent& event) {
  json record;
  record["event_id"] = event.event_id;
  record["kind"] = EventKindName(event.kind);
  if (event.track) record["track"] = TrackId(*event.track);
  record["seq"] = event.seq;
  record["enqueued_at"] = FormatRfc3339(event.enqueued_at);

  json payload = json::object();
  switch (event.kind) {
    case EventKind::kVote: {
      const auto& vote = event.vote();
      payload["battle_id"] = vote.battle_id;
      payload["model_a"] = vote.model_a;
      payload["model_b"] = vote.model_b;
      payload["score_a"] = vote.outcome.score_a();
      payload["voter_id"] = vote.voter_id;
      payload["submitted_at"] = FormatRfc3339(vote.submitted_at);
      break;
    }
    case EventKind::kRegistration: {
      const auto& reg = event.registration();
      payload["model_id"] = reg.model_id;
      json tracks = json::array();
      for (Track t : reg.tracks) tracks.push_back(TrackId(t));
      payload["tracks"] = std::move(tracks);
      payload["provider"] = reg.provider;
      break;
    }
    case EventKind::kRegressionTick:
      if (event.tick().as_of) {
        payload["as_of"] = FormatRfc3339(*event.tick().as_of);
      }
      break;
  }
  record["payload"] = std::move(payload);
  return record;
}

ArenaEvent FromLogRecord(const json& record) {
  try {
    ArenaEvent event;
    auto kind = ParseEventKind(record.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown kind");
    event.kind = *kind;
    event.event_id = record.at("event_id").get<std::string>();
    if (auto it = record.find("track"); it != record.end()) {
      event.track = ReadTrack(it->get<std::string>());
    }
    event.seq = record.at("seq").get<std::uint64_t>();
    event.enqueued_at = ReadTime(record, "enqueued_at");
    const json& payload = record.at("payload");
    switch (event.kind) {
      case EventKind::kVote: {
        VotePayload vote;
        vote.battle_id = payload.at("battle_id").get<std::string>();
        vote.model_a = payload.at("model_a").get<std::string>();
        vote.model_b = payload.at("model_b").get<std::string>();
        vote.outcome = Outcome::FromScore(payload.at("score_a").get<double>());
        vote.voter_id = payload.at("voter_id").get<std::string>();
        vote.submitted_at = ReadTime(payload, "submitted_at");
        event.payload = std::move(vote);
        break;
      }
      case EventKind::kRegistration: {
        RegistrationPayload reg;
        reg.model_id = payload.at("model_id").get<std::string>();
        for (const auto& t : payload.at("tracks")) {
          reg.tracks.push_back(ReadTrack(t.get<std::string>()));
        }
        reg.provider = payload.value("provider", json::object());
        event.payload = std::move(reg);
        break;
      }
      case EventKind::kRegressionTick: {
        RegressionTickPayload tick;
        if (payload.contains("as_of")) tick.as_of = ReadTime(payload, "as_of");
        event.payload = tick;
        break;
      }
    }
    ValidateEvent(event);
    return event;
  } catch (const ArenaError& e) {
    throw ArenaError(ErrorCode::kCorruption,
                     std::string("undecodable event: ") + e.what());
  } catch (const std::exception& e) {
    throw ArenaError(ErrorCode::kCorruption,
                     std::string("undecodable event: ") + e.what());
  }
}

}  // namespace arena
