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

#ifndef ARENA_PIPELINE_EVENT_PIPELINE_H_
#define ARENA_PIPELINE_EVENT_PIPELINE_H_

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "arena/core/clock.h"
#include "arena/core/track.h"
#include "arena/leaderboard/leaderboard.h"
#include "arena/persistence/event_log.h"
#include "arena/pipeline/arena_state.h"
#include "arena/pipeline/event.h"

namespace arena {

enum class BackpressureMode {
  // Enqueue waits for room.
  kBlock,
  // Enqueue throws ArenaError(kBackpressure) without logging the event.
  kReject,
};

struct PipelineOptions {
  // Per-track queue bound.
  std::size_t queue_capacity = 8192;
  BackpressureMode backpressure = BackpressureMode::kBlock;
  // When false no worker threads run and the caller drives ProcessNext().
  bool start_workers = true;
  std::size_t snapshot_retention = Leaderboard::kDefaultRetention;
};

struct LatencySummary {
  std::size_t count = 0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

// Ordered, durable, idempotent ingestion in front of one serialized rating
// worker per track. Any number of producers may call Enqueue concurrently.
//
// On construction the pipeline recovers from the log (and from the latest
// state snapshot, when a store is given): every acknowledged event is folded
// back in, including events that were logged but never applied before a
// crash.
class EventPipeline {
 public:
  EventPipeline(EventLog& log, const TrackParamsTable& params,
                const Clock& clock, PipelineOptions options = {},
                const SnapshotStore* snapshots = nullptr);
  ~EventPipeline();

  EventPipeline(const EventPipeline&) = delete;
  EventPipeline& operator=(const EventPipeline&) = delete;

  // Assigns seq and enqueued_at, appends to the log, and only then
  // acknowledges and hands the event to its track worker(s). A repeated
  // event_id returns the original acknowledgment without logging anything.
  // Throws ArenaError: kValidation (malformed), kConflict (a second vote for
  // the same battle), kBackpressure (queue full in reject mode), kIngest
  // (log write failed; event not acknowledged).
  Ack Enqueue(ArenaEvent event);

  // Manual mode only: applies the oldest pending event of the track.
  // Returns nullopt when the track has nothing pending.
  std::optional<AppliedUpdate> ProcessNext(Track track);

  // Manual mode only: applies everything pending, track by track.
  std::size_t ProcessAll();

  // Blocks until every acknowledged event has been applied.
  void Drain();

  // Blocks until the track's snapshot reflects `seq` or later. Returns false
  // on timeout.
  bool WaitForSeq(Track track, std::uint64_t seq, std::chrono::milliseconds timeout);

  // Latest snapshot; never waits for the worker to finish an update.
  std::shared_ptr<const LeaderboardSnapshot> Current(Track track) const;
  std::shared_ptr<const LeaderboardSnapshot> SnapshotAt(Track track,
                                                        std::uint64_t version) const;

  // Read-side helpers; each takes the track's state lock briefly.
  std::vector<std::string> ModelsInTrack(Track track) const;
  bool IsRegistered(const std::string& model_id) const;
  std::optional<ModelRegistration> Registration(const std::string& model_id) const;
  std::optional<RatingState> RatingOf(Track track, const std::string& model_id) const;
  // Counts for every unordered pair (i < j) of `models`, row-major.
  std::vector<std::int64_t> PairCounts(Track track,
                                       const std::vector<std::string>& models) const;
  std::vector<DeadLetter> DeadLetters(Track track) const;
  std::optional<Ack> AckFor(const std::string& event_id) const;
  std::optional<std::string> VoteForBattle(const std::string& battle_id) const;

  // Consistent copy of the whole state. Drains first.
  ArenaState ExportState();
  // Drains, then writes a snapshot covering the current log prefix.
  void WriteStateSnapshot(const SnapshotStore& store);

  // Enqueue-ack to snapshot-publish latency of every applied event.
  LatencySummary Latency(Track track) const;
  std::size_t MaxQueueDepth(Track track) const;
  // Clears the latency samples and the queue-depth high-water mark.
  void ResetStats(Track track);
  std::size_t QueueDepth(Track track) const;

  bool WorkersAlive() const;
  const EventLog& log() const { return log_; }

  // Stops workers. Pending events stay in the log and are applied by the
  // next recovery.
  void Stop();

 private:
  struct Pending {
    ArenaEvent event;
    std::chrono::steady_clock::time_point acked_at;
  };

  struct TrackRuntime {
    TrackRuntime(Track track, RatingParams params, std::size_t retention)
        : state(track, params, retention) {}

    // Queue.
    mutable std::mutex queue_mu;
    std::condition_variable queue_cv;
    std::deque<Pending> queue;
    std::size_t in_flight = 0;
    std::size_t max_depth = 0;

    // State, written by the worker only.
    mutable std::shared_mutex state_mu;
    TrackState state;

    // Published snapshot pointer.
    mutable std::mutex snapshot_mu;
    std::condition_variable snapshot_cv;
    std::shared_ptr<const LeaderboardSnapshot> current;

    mutable std::mutex latency_mu;
    std::vector<float> latencies_ms;

    std::thread worker;
  };

  TrackRuntime& runtime(Track t) { return *tracks_[TrackIndex(t)]; }
  const TrackRuntime& runtime(Track t) const { return *tracks_[TrackIndex(t)]; }

  void Recover(const SnapshotStore* snapshots);
  void WorkerLoop(Track track);
  AppliedUpdate ApplyPending(TrackRuntime& rt, const Pending& pending);
  bool HasRoom(const ArenaEvent& event) const;

  EventLog& log_;
  const Clock& clock_;
  PipelineOptions options_;

  mutable std::mutex ingest_mu_;
  std::condition_variable room_cv_;
  IngestState ingest_;

  std::array<std::unique_ptr<TrackRuntime>, kTrackCount> tracks_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> live_workers_{0};
};

}  // namespace arena

#endif  // ARENA_PIPELINE_EVENT_PIPELINE_H_
