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

#ifndef ARENA_ENGINE_ARENA_ENGINE_H_
#define ARENA_ENGINE_ARENA_ENGINE_H_

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arena/core/clock.h"
#include "arena/core/random.h"
#include "arena/core/thread_pool.h"
#include "arena/core/track.h"
#include "arena/pipeline/event_pipeline.h"
#include "arena/provider/provider.h"
#include "json.hpp"

namespace arena {

struct EngineOptions {
  bool tie_enabled = false;
  Millis battle_ttl = std::chrono::hours(24);
  // Seeds battle ids, vote event ids and per-battle pairing seeds.
  std::uint64_t seed = 0x5eed;
};

enum class BattleStatus { kPendingResponses, kAwaitingVote, kVoted, kExpired };
std::string_view BattleStatusName(BattleStatus status);

struct Battle {
  std::string battle_id;
  Track track = Track::kLiteratureReview;
  std::string prompt;
  std::string candidate_left;
  std::string candidate_right;
  std::string response_left;
  std::string response_right;
  Timestamp created_at{};
  BattleStatus status = BattleStatus::kPendingResponses;
  // Why the battle expired, if it did.
  std::string expiry_reason;
  // Set once voted.
  std::string vote_event_id;
  Outcome outcome = Outcome::Tie();
};

// What a voter may see. Candidate ids appear only after the vote.
nlohmann::json VoterView(const Battle& battle, bool tie_enabled);

enum class VoteChoice { kLeft, kRight, kTie };
std::optional<VoteChoice> ParseVoteChoice(std::string_view text);

struct VoteReceipt {
  Ack ack;
  Battle battle;
};

// Samples one unordered pair (i < j) among n models with weight
// 1 / (1 + n_ij). `pair_counts` is row-major over i < j, as returned by
// EventPipeline::PairCounts.
std::pair<std::size_t, std::size_t> SelectPair(
    std::size_t n, const std::vector<std::int64_t>& pair_counts, SplitMix64& rng);

// Battle lifecycle on top of the pipeline: registration, pairing, blind
// response collection and vote emission.
class ArenaEngine {
 public:
  // `fetch_runner` executes response fetches; InlineRunner() makes
  // CreateBattle synchronous.
  ArenaEngine(EventPipeline& pipeline, const ProviderGateway& gateway,
              const Clock& clock, TaskRunner fetch_runner,
              EngineOptions options = {});
  // Waits for outstanding fetches.
  ~ArenaEngine();

  ArenaEngine(const ArenaEngine&) = delete;
  ArenaEngine& operator=(const ArenaEngine&) = delete;

  // One registration event per track. Throws ArenaError: kConflict for a
  // known id, kValidation for an empty id, no tracks or a bad descriptor.
  std::vector<Ack> RegisterModel(const std::string& model_id,
                                 std::vector<Track> tracks,
                                 ProviderDescriptor provider);

  // Picks two distinct models of the track and dispatches the response
  // fetches. Without a seed, one is drawn from the engine's generator.
  // Throws kArenaNotReady (< 2 models) or kValidation (empty prompt).
  Battle CreateBattle(Track track, const std::string& prompt,
                      std::optional<std::uint64_t> pairing_seed = {});

  // Same, with fixed candidates.
  Battle CreateBattleForPair(Track track, const std::string& prompt,
                             const std::string& left, const std::string& right);

  std::optional<Battle> GetBattle(const std::string& battle_id) const;

  // left -> S_A = 1, right -> 0, tie -> 0.5 with model_a = candidate_left.
  // Throws kNotFound, kConflict (already voted, expired, not ready),
  // kValidation (tie disabled), or whatever Enqueue throws; in the last case
  // the battle stays open. Repeating the same explicit event_id returns the
  // original receipt.
  VoteReceipt CastVote(const std::string& battle_id, VoteChoice choice,
                       const std::string& voter_id,
                       std::optional<std::string> event_id = {});

  // Marks open battles older than the TTL expired. Returns how many.
  std::size_t ExpireStale();

  // Blocks until every dispatched fetch has finished.
  void WaitForFetches();

  const EngineOptions& options() const { return options_; }
  EventPipeline& pipeline() { return pipeline_; }

 private:
  struct Slot {
    mutable std::mutex mu;
    Battle battle;
    std::optional<Ack> ack;
  };

  std::shared_ptr<Slot> Find(const std::string& battle_id) const;
  ProviderDescriptor DescriptorFor(const std::string& model_id) const;
  Battle Launch(Track track, const std::string& prompt, std::string left,
                std::string right);
  void Fetch(std::shared_ptr<Slot> slot);
  bool ExpiredLocked(Slot& slot, Timestamp now) const;
  std::uint64_t NextRandom();

  EventPipeline& pipeline_;
  const ProviderGateway& gateway_;
  const Clock& clock_;
  TaskRunner runner_;
  EngineOptions options_;

  std::mutex rng_mu_;
  SplitMix64 rng_;

  std::mutex register_mu_;
  mutable std::mutex providers_mu_;
  std::map<std::string, ProviderDescriptor> providers_;

  mutable std::mutex battles_mu_;
  std::map<std::string, std::shared_ptr<Slot>> battles_;

  std::mutex fetch_mu_;
  std::condition_variable fetch_cv_;
  std::size_t fetches_in_flight_ = 0;
};

}  // namespace arena

#endif  // ARENA_ENGINE_ARENA_ENGINE_H_
