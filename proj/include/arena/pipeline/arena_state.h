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

#ifndef ARENA_PIPELINE_ARENA_STATE_H_
#define ARENA_PIPELINE_ARENA_STATE_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arena/core/clock.h"
#include "arena/core/track.h"
#include "arena/leaderboard/leaderboard.h"
#include "arena/persistence/event_log.h"
#include "arena/pipeline/event.h"
#include "arena/rating/elo.h"
#include "json.hpp"

namespace arena {

using TrackParamsTable = std::array<RatingParams, kTrackCount>;

TrackParamsTable UniformParams(const RatingParams& params = {});

// Acknowledgment returned by enqueue. seq is per track for scoped events and
// global for regression ticks.
struct Ack {
  std::string event_id;
  EventKind kind = EventKind::kVote;
  std::optional<Track> track;
  std::uint64_t seq = 0;
  std::uint64_t log_position = 0;

  bool operator==(const Ack&) const = default;
};

struct ModelRecord {
  RatingState state;
  Timestamp last_active_at{};

  bool operator==(const ModelRecord&) const = default;
};

struct DeadLetter {
  std::string event_id;
  EventKind kind = EventKind::kVote;
  std::uint64_t seq = 0;
  std::string reason;

  bool operator==(const DeadLetter&) const = default;
};

// What one applied event did to its track.
struct AppliedUpdate {
  std::string event_id;
  EventKind kind = EventKind::kVote;
  Track track = Track::kIdeation;
  std::uint64_t seq = 0;
  std::optional<UpdateResult> update;
  std::vector<std::string> regressed;
  std::optional<std::string> dead_letter_reason;
  std::uint64_t snapshot_version = 0;
};

// Rating state of one track. Apply() is the only mutation path and is shared
// by the live workers and by replay, so both produce bit-identical results.
class TrackState {
 public:
  TrackState(Track track, RatingParams params,
             std::size_t retention = Leaderboard::kDefaultRetention);

  // Applies one event and publishes a new leaderboard snapshot. Events that
  // reference unknown models, duplicate a registration, or trip a rating
  // domain error are dead-lettered: they leave ratings untouched.
  AppliedUpdate Apply(const ArenaEvent& event);

  Track track() const { return track_; }
  const RatingParams& params() const { return params_; }
  const std::map<std::string, ModelRecord>& models() const { return models_; }
  const PairHistory& pairs() const { return pairs_; }
  std::uint64_t last_seq() const { return last_seq_; }
  const Leaderboard& leaderboard() const { return leaderboard_; }
  const std::vector<DeadLetter>& dead_letters() const { return dead_letters_; }

  nlohmann::json ToJson() const;
  static TrackState FromJson(const nlohmann::json& j, RatingParams params,
                             std::size_t retention);

  // Compares ratings, pair history, sequence position, dead letters and the
  // current leaderboard snapshot (not the retained history).
  bool operator==(const TrackState& other) const;

 private:
  void ApplyVote(const ArenaEvent& event, AppliedUpdate* out);
  void ApplyRegistration(const ArenaEvent& event, AppliedUpdate* out);
  void ApplyTick(const ArenaEvent& event, AppliedUpdate* out);
  void Publish(AppliedUpdate* out);

  Track track_;
  RatingParams params_;
  std::map<std::string, ModelRecord> models_;
  PairHistory pairs_;
  std::uint64_t last_seq_ = 0;
  Leaderboard leaderboard_;
  std::vector<DeadLetter> dead_letters_;
};

struct ModelRegistration {
  std::vector<Track> tracks;
  nlohmann::json provider = nlohmann::json::object();

  bool operator==(const ModelRegistration&) const = default;
};

// Everything decided at acknowledgment time: sequence counters, idempotency
// keys, one-vote-per-battle bookkeeping and the model directory.
struct IngestState {
  std::array<std::uint64_t, kTrackCount> track_seq{};
  std::uint64_t global_seq = 0;
  std::unordered_map<std::string, Ack> acks;
  std::unordered_map<std::string, std::string> battle_votes;
  std::map<std::string, ModelRegistration> registry;

  // Next sequence number for the event's scope.
  std::uint64_t NextSeq(const ArenaEvent& event) const;
  void Admit(const ArenaEvent& event, const Ack& ack);

  // Sorted model ids registered in the track.
  std::vector<std::string> ModelsInTrack(Track track) const;

  nlohmann::json ToJson() const;
  static IngestState FromJson(const nlohmann::json& j);

  bool operator==(const IngestState&) const = default;
};

struct ArenaState {
  IngestState ingest;
  std::vector<TrackState> tracks;
  // Log records folded so far.
  std::uint64_t log_position = 0;

  static ArenaState Empty(const TrackParamsTable& params,
                          std::size_t retention = Leaderboard::kDefaultRetention);

  TrackState& track(Track t) { return tracks[TrackIndex(t)]; }
  const TrackState& track(Track t) const { return tracks[TrackIndex(t)]; }

  nlohmann::json ToJson() const;
  static ArenaState FromJson(const nlohmann::json& j,
                             const TrackParamsTable& params,
                             std::size_t retention = Leaderboard::kDefaultRetention);

  bool operator==(const ArenaState&) const = default;
};

// Folds log records, in order, onto `state`. Each record's seq must be
// exactly one past the previous seq of its scope; a gap or duplicate throws
// ArenaError(kCorruption) naming the log position.
void ReplayInto(ArenaState& state, const std::vector<LogRecord>& records);

ArenaState Replay(const std::vector<LogRecord>& records,
                  const TrackParamsTable& params,
                  std::size_t retention = Leaderboard::kDefaultRetention);

}  // namespace arena

#endif  // ARENA_PIPELINE_ARENA_STATE_H_
