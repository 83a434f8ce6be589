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

#ifndef ARENA_PIPELINE_EVENT_H_
#define ARENA_PIPELINE_EVENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arena/core/clock.h"
#include "arena/core/track.h"
#include "arena/rating/elo.h"
#include "json.hpp"

namespace arena {

enum class EventKind { kVote, kRegistration, kRegressionTick };

std::string_view EventKindName(EventKind kind);
std::optional<EventKind> ParseEventKind(std::string_view name);

// One human pairwise judgment; model_a is the left-hand candidate.
struct VotePayload {
  std::string battle_id;
  std::string model_a;
  std::string model_b;
  Outcome outcome = Outcome::Win();
  std::string voter_id;
  Timestamp submitted_at{};

  bool operator==(const VotePayload&) const = default;
};

// Registration events are per track. `tracks` lists every track of the
// registration so the model directory can be rebuilt from any one of them;
// `provider` is opaque to the pipeline.
struct RegistrationPayload {
  std::string model_id;
  std::vector<Track> tracks;
  nlohmann::json provider = nlohmann::json::object();

  bool operator==(const RegistrationPayload&) const = default;
};

// Regresses inactive models in every track. Inactivity is judged against
// as_of, which defaults to the tick's enqueue time.
struct RegressionTickPayload {
  std::optional<Timestamp> as_of;

  bool operator==(const RegressionTickPayload&) const = default;
};

struct ArenaEvent {
  EventKind kind = EventKind::kVote;
  std::string event_id;
  // Set for vote and registration; empty for regression ticks.
  std::optional<Track> track;
  // Assigned at enqueue: per track for vote/registration, global for ticks.
  std::uint64_t seq = 0;
  Timestamp enqueued_at{};
  std::variant<VotePayload, RegistrationPayload, RegressionTickPayload> payload;

  static ArenaEvent Vote(std::string event_id, Track track, VotePayload vote);
  static ArenaEvent Registration(std::string event_id, Track track,
                                 RegistrationPayload registration);
  static ArenaEvent RegressionTick(std::string event_id,
                                   std::optional<Timestamp> as_of = {});

  const VotePayload& vote() const { return std::get<VotePayload>(payload); }
  const RegistrationPayload& registration() const {
    return std::get<RegistrationPayload>(payload);
  }
  const RegressionTickPayload& tick() const {
    return std::get<RegressionTickPayload>(payload);
  }

  bool operator==(const ArenaEvent&) const = default;
};

// Structural checks done before an event is admitted. Throws
// ArenaError(kValidation).
void ValidateEvent(const ArenaEvent& event);

// Log record field names: event_id, kind, track (scoped events only), seq,
// enqueued_at, payload.
nlohmann::json ToLogRecord(const ArenaEvent& event);

// Throws ArenaError(kCorruption) when the record cannot be decoded.
ArenaEvent FromLogRecord(const nlohmann::json& record);

}  // namespace arena

#endif  // ARENA_PIPELINE_EVENT_H_
