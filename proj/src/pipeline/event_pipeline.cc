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

#include "arena/pipeline/event_pipeline.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "arena/core/errors.h"

namespace arena {
namespace {

double Percentile(std::vector<float> values, double q) {
  if (values.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(
      std::min<double>(values.size() - 1, q * static_cast<double>(values.size())));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k),
                   values.end());
  return values[k];
}

}  // namespace

EventPipeline::EventPipeline(EventLog& log, const TrackParamsTable& params,
                             const Clock& clock, PipelineOptions options,
                             const SnapshotStore* snapshots)
    : log_(log), clock_(clock), options_(options) {
  if (options_.queue_capacity == 0) options_.queue_capacity = 1;
  for (Track t : kAllTracks) {
    params[TrackIndex(t)].Validate();
    tracks_[TrackIndex(t)] = std::make_unique<TrackRuntime>(
        t, params[TrackIndex(t)], options_.snapshot_retention);
  }
  Recover(snapshots);
  if (options_.start_workers) {
    live_workers_ = kTrackCount;
    for (Track t : kAllTracks) {
      runtime(t).worker = std::thread([this, t] { WorkerLoop(t); });
    }
  }
}

EventPipeline::~EventPipeline() { Stop(); }

void EventPipeline::Recover(const SnapshotStore* snapshots) {
  TrackParamsTable params;
  for (Track t : kAllTracks) params[TrackIndex(t)] = runtime(t).state.params();

  std::optional<ArenaState> state;
  if (snapshots != nullptr) {
    if (auto entry = snapshots->LoadLatest();
        entry && entry->log_position <= log_.size()) {
      state = ArenaState::FromJson(entry->document, params,
                                   options_.snapshot_retention);
    }
  }
  if (!state) state = ArenaState::Empty(params, options_.snapshot_retention);
  ReplayInto(*state, log_.Scan(state->log_position));

  ingest_ = std::move(state->ingest);
  for (Track t : kAllTracks) {
    TrackRuntime& rt = runtime(t);
    rt.state = std::move(state->tracks[TrackIndex(t)]);
    rt.current = rt.state.leaderboard().Current();
  }
}

bool EventPipeline::HasRoom(const ArenaEvent& event) const {
  auto room = [this](const TrackRuntime& rt) {
    std::lock_guard<std::mutex> lock(rt.queue_mu);
    return rt.queue.size() < options_.queue_capacity;
  };
  if (event.track) return room(runtime(*event.track));
  for (Track t : kAllTracks) {
    if (!room(runtime(t))) return false;
  }
  return true;
}

Ack EventPipeline::Enqueue(ArenaEvent event) {
  ValidateEvent(event);
  std::unique_lock<std::mutex> lock(ingest_mu_);
  for (;;) {
    if (auto it = ingest_.acks.find(event.event_id); it != ingest_.acks.end()) {
      return it->second;
    }
    if (event.kind == EventKind::kVote) {
      auto it = ingest_.battle_votes.find(event.vote().battle_id);
      if (it != ingest_.battle_votes.end()) {
        throw ArenaError(ErrorCode::kConflict,
                         "battle " + event.vote().battle_id + " already voted");
      }
    }
    if (HasRoom(event)) break;
    if (options_.backpressure == BackpressureMode::kReject ||
        live_workers_.load() == 0 || stopping_.load()) {
      throw ArenaError(ErrorCode::kBackpressure, "event queue is full");
    }
    room_cv_.wait_for(lock, std::chrono::milliseconds(1));
  }

  event.seq = ingest_.NextSeq(event);
  event.enqueued_at = clock_.Now();
  const std::uint64_t position = log_.Append(ToLogRecord(event));
  const Ack ack{event.event_id, event.kind, event.track, event.seq, position};
  ingest_.Admit(event, ack);

  const auto acked_at = std::chrono::steady_clock::now();
  auto push = [&](TrackRuntime& rt, ArenaEvent e) {
    {
      std::lock_guard<std::mutex> q(rt.queue_mu);
      rt.queue.push_back(Pending{std::move(e), acked_at});
      rt.max_depth = std::max(rt.max_depth, rt.queue.size());
    }
    rt.queue_cv.notify_all();
  };
  if (event.track) {
    push(runtime(*event.track), std::move(event));
  } else {
    for (Track t : kAllTracks) push(runtime(t), event);
  }
  return ack;
}

AppliedUpdate EventPipeline::ApplyPending(TrackRuntime& rt,
                                          const Pending& pending) {
  AppliedUpdate update;
  std::shared_ptr<const LeaderboardSnapshot> snapshot;
  {
    std::unique_lock<std::shared_mutex> lock(rt.state_mu);
    update = rt.state.Apply(pending.event);
    snapshot = rt.state.leaderboard().Current();
  }
  {
    std::lock_guard<std::mutex> lock(rt.snapshot_mu);
    rt.current = std::move(snapshot);
  }
  rt.snapshot_cv.notify_all();
  const auto elapsed = std::chrono::steady_clock::now() - pending.acked_at;
  {
    std::lock_guard<std::mutex> lock(rt.latency_mu);
    rt.latencies_ms.push_back(static_cast<float>(
        std::chrono::duration<double, std::milli>(elapsed).count()));
  }
  return update;
}

void EventPipeline::WorkerLoop(Track track) {
  TrackRuntime& rt = runtime(track);
  for (;;) {
    Pending pending;
    {
      std::unique_lock<std::mutex> lock(rt.queue_mu);
      rt.queue_cv.wait(lock, [&] { return stopping_.load() || !rt.queue.empty(); });
      if (stopping_.load()) break;
      pending = std::move(rt.queue.front());
      rt.queue.pop_front();
      rt.in_flight = 1;
    }
    room_cv_.notify_all();
    ApplyPending(rt, pending);
    {
      std::lock_guard<std::mutex> lock(rt.queue_mu);
      rt.in_flight = 0;
    }
    rt.queue_cv.notify_all();
  }
  --live_workers_;
}

std::optional<AppliedUpdate> EventPipeline::ProcessNext(Track track) {
  if (options_.start_workers) {
    throw std::logic_error("ProcessNext requires a pipeline without workers");
  }
  TrackRuntime& rt = runtime(track);
  Pending pending;
  {
    std::lock_guard<std::mutex> lock(rt.queue_mu);
    if (rt.queue.empty()) return std::nullopt;
    pending = std::move(rt.queue.front());
    rt.queue.pop_front();
  }
  return ApplyPending(rt, pending);
}

std::size_t EventPipeline::ProcessAll() {
  std::size_t applied = 0;
  for (Track t : kAllTracks) {
    while (ProcessNext(t)) ++applied;
  }
  return applied;
}

void EventPipeline::Drain() {
  if (!options_.start_workers) {
    ProcessAll();
    return;
  }
  for (Track t : kAllTracks) {
    TrackRuntime& rt = runtime(t);
    std::unique_lock<std::mutex> lock(rt.queue_mu);
    rt.queue_cv.wait(lock, [&] {
      return stopping_.load() || (rt.queue.empty() && rt.in_flight == 0);
    });
  }
}

bool EventPipeline::WaitForSeq(Track track, std::uint64_t seq,
                               std::chrono::milliseconds timeout) {
  TrackRuntime& rt = runtime(track);
  if (!options_.start_workers) {
    while (rt.current->produced_by_seq < seq && ProcessNext(track)) {
    }
    return rt.current->produced_by_seq >= seq;
  }
  std::unique_lock<std::mutex> lock(rt.snapshot_mu);
  return rt.snapshot_cv.wait_for(
      lock, timeout, [&] { return rt.current->produced_by_seq >= seq; });
}

std::shared_ptr<const LeaderboardSnapshot> EventPipeline::Current(
    Track track) const {
  const TrackRuntime& rt = runtime(track);
  std::lock_guard<std::mutex> lock(rt.snapshot_mu);
  return rt.current;
}

std::shared_ptr<const LeaderboardSnapshot> EventPipeline::SnapshotAt(
    Track track, std::uint64_t version) const {
  const TrackRuntime& rt = runtime(track);
  std::shared_lock<std::shared_mutex> lock(rt.state_mu);
  return rt.state.leaderboard().AtVersion(version);
}

std::vector<std::string> EventPipeline::ModelsInTrack(Track track) const {
  std::lock_guard<std::mutex> lock(ingest_mu_);
  return ingest_.ModelsInTrack(track);
}

bool EventPipeline::IsRegistered(const std::string& model_id) const {
  std::lock_guard<std::mutex> lock(ingest_mu_);
  return ingest_.registry.count(model_id) != 0;
}

std::optional<ModelRegistration> EventPipeline::Registration(
    const std::string& model_id) const {
  std::lock_guard<std::mutex> lock(ingest_mu_);
  auto it = ingest_.registry.find(model_id);
  if (it == ingest_.registry.end()) return std::nullopt;
  return it->second;
}

std::optional<RatingState> EventPipeline::RatingOf(
    Track track, const std::string& model_id) const {
  const TrackRuntime& rt = runtime(track);
  std::shared_lock<std::shared_mutex> lock(rt.state_mu);
  auto it = rt.state.models().find(model_id);
  if (it == rt.state.models().end()) return std::nullopt;
  return it->second.state;
}

std::vector<std::int64_t> EventPipeline::PairCounts(
    Track track, const std::vector<std::string>& models) const {
  const TrackRuntime& rt = runtime(track);
  std::vector<std::int64_t> counts;
  counts.reserve(models.size() * (models.size() - (models.empty() ? 0 : 1)) / 2);
  std::shared_lock<std::shared_mutex> lock(rt.state_mu);
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      counts.push_back(rt.state.pairs().Count(models[i], models[j]));
    }
  }
  return counts;
}

std::vector<DeadLetter> EventPipeline::DeadLetters(Track track) const {
  const TrackRuntime& rt = runtime(track);
  std::shared_lock<std::shared_mutex> lock(rt.state_mu);
  return rt.state.dead_letters();
}

std::optional<Ack> EventPipeline::AckFor(const std::string& event_id) const {
  std::lock_guard<std::mutex> lock(ingest_mu_);
  auto it = ingest_.acks.find(event_id);
  if (it == ingest_.acks.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> EventPipeline::VoteForBattle(
    const std::string& battle_id) const {
  std::lock_guard<std::mutex> lock(ingest_mu_);
  auto it = ingest_.battle_votes.find(battle_id);
  if (it == ingest_.battle_votes.end()) return std::nullopt;
  return it->second;
}

ArenaState EventPipeline::ExportState() {
  // Holding the ingest lock keeps producers out while the workers catch up.
  std::lock_guard<std::mutex> lock(ingest_mu_);
  Drain();
  ArenaState state;
  state.ingest = ingest_;
  state.log_position = log_.size();
  state.tracks.reserve(kTrackCount);
  for (Track t : kAllTracks) {
    const TrackRuntime& rt = runtime(t);
    std::shared_lock<std::shared_mutex> state_lock(rt.state_mu);
    state.tracks.push_back(rt.state);
  }
  return state;
}

void EventPipeline::WriteStateSnapshot(const SnapshotStore& store) {
  ArenaState state = ExportState();
  store.Write(state.log_position, state.ToJson());
}

LatencySummary EventPipeline::Latency(Track track) const {
  const TrackRuntime& rt = runtime(track);
  std::vector<float> values;
  {
    std::lock_guard<std::mutex> lock(rt.latency_mu);
    values = rt.latencies_ms;
  }
  LatencySummary summary;
  summary.count = values.size();
  if (values.empty()) return summary;
  summary.max_ms = *std::max_element(values.begin(), values.end());
  summary.p50_ms = Percentile(values, 0.50);
  summary.p99_ms = Percentile(std::move(values), 0.99);
  return summary;
}

std::size_t EventPipeline::MaxQueueDepth(Track track) const {
  const TrackRuntime& rt = runtime(track);
  std::lock_guard<std::mutex> lock(rt.queue_mu);
  return rt.max_depth;
}

void EventPipeline::ResetStats(Track track) {
  TrackRuntime& rt = runtime(track);
  {
    std::lock_guard<std::mutex> lock(rt.queue_mu);
    rt.max_depth = rt.queue.size();
  }
  std::lock_guard<std::mutex> lock(rt.latency_mu);
  rt.latencies_ms.clear();
}

std::size_t EventPipeline::QueueDepth(Track track) const {
  const TrackRuntime& rt = runtime(track);
  std::lock_guard<std::mutex> lock(rt.queue_mu);
  return rt.queue.size();
}

bool EventPipeline::WorkersAlive() const {
  return options_.start_workers ? live_workers_.load() == kTrackCount
                                : !stopping_.load();
}

void EventPipeline::Stop() {
  if (stopping_.exchange(true)) return;
  for (Track t : kAllTracks) {
    TrackRuntime& rt = runtime(t);
    {
      std::lock_guard<std::mutex> lock(rt.queue_mu);
    }
    rt.queue_cv.notify_all();
  }
  for (Track t : kAllTracks) {
    TrackRuntime& rt = runtime(t);
    if (rt.worker.joinable()) rt.worker.join();
  }
  room_cv_.notify_all();
}

}  // namespace arena
