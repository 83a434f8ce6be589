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

#include "arena/engine/arena_engine.h"

#include <algorithm>

#include "arena/core/errors.h"

namespace arena {

using nlohmann::json;

std::string_view BattleStatusName(BattleStatus status) {
  switch (status) {
    case BattleStatus::kPendingResponses: return "pending_responses";
    case BattleStatus::kAwaitingVote: return "awaiting_vote";
    case BattleStatus::kVoted: return "voted";
    case BattleStatus::kExpired: return "expired";
  }
  return "unknown";
}

json VoterView(const Battle& battle, bool tie_enabled) {
  json view = {
      {"battle_id", battle.battle_id},
      {"track", TrackId(battle.track)},
      {"prompt", battle.prompt},
      {"status", BattleStatusName(battle.status)},
      {"created_at", FormatRfc3339(battle.created_at)},
      {"tie_enabled", tie_enabled},
  };
  if (battle.status == BattleStatus::kPendingResponses) {
    view["responses"] = nullptr;
  } else {
    view["responses"] = {{"left", battle.response_left},
                         {"right", battle.response_right}};
  }
  if (battle.status == BattleStatus::kExpired) {
    view["expiry_reason"] = battle.expiry_reason;
  }
  if (battle.status == BattleStatus::kVoted) {
    view["revealed"] = {{"left", battle.candidate_left},
                        {"right", battle.candidate_right}};
    view["score_left"] = battle.outcome.score_a();
  }
  return view;
}

std::optional<VoteChoice> ParseVoteChoice(std::string_view text) {
  if (text == "left") return VoteChoice::kLeft;
  if (text == "right") return VoteChoice::kRight;
  if (text == "tie") return VoteChoice::kTie;
  return std::nullopt;
}

std::pair<std::size_t, std::size_t> SelectPair(
    std::size_t n, const std::vector<std::int64_t>& pair_counts, SplitMix64& rng) {
  if (n < 2 || pair_counts.size() != n * (n - 1) / 2) {
    throw std::invalid_argument("SelectPair: bad pair table");
  }
  double total = 0.0;
  for (std::int64_t c : pair_counts) total += 1.0 / (1.0 + static_cast<double>(c));
  double target = rng.NextDouble() * total;
  std::size_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++index) {
      target -= 1.0 / (1.0 + static_cast<double>(pair_counts[index]));
      if (target < 0.0) return {i, j};
    }
  }
  // Rounding left a sliver past the last weight.
  return {n - 2, n - 1};
}

ArenaEngine::ArenaEngine(EventPipeline& pipeline, const ProviderGateway& gateway,
                         const Clock& clock, TaskRunner fetch_runner,
                         EngineOptions options)
    : pipeline_(pipeline),
      gateway_(gateway),
      clock_(clock),
      runner_(std::move(fetch_runner)),
      options_(options),
      rng_(options.seed) {
  if (options_.battle_ttl.count() <= 0) {
    throw ArenaError(ErrorCode::kValidation, "battle ttl must be positive");
  }
}

ArenaEngine::~ArenaEngine() { WaitForFetches(); }

void ArenaEngine::WaitForFetches() {
  std::unique_lock<std::mutex> lock(fetch_mu_);
  fetch_cv_.wait(lock, [&] { return fetches_in_flight_ == 0; });
}

std::uint64_t ArenaEngine::NextRandom() {
  std::lock_guard<std::mutex> lock(rng_mu_);
  return rng_.Next();
}

std::vector<Ack> ArenaEngine::RegisterModel(const std::string& model_id,
                                            std::vector<Track> tracks,
                                            ProviderDescriptor provider) {
  if (model_id.empty()) {
    throw ArenaError(ErrorCode::kValidation, "model_id must be nonempty");
  }
  std::sort(tracks.begin(), tracks.end());
  tracks.erase(std::unique(tracks.begin(), tracks.end()), tracks.end());
  if (tracks.empty()) {
    throw ArenaError(ErrorCode::kValidation, "at least one track is required");
  }
  provider.Validate();

  std::lock_guard<std::mutex> lock(register_mu_);
  if (pipeline_.IsRegistered(model_id)) {
    throw ArenaError(ErrorCode::kConflict, "model already registered: " + model_id);
  }
  {
    std::lock_guard<std::mutex> plock(providers_mu_);
    providers_[model_id] = provider;
  }
  std::vector<Ack> acks;
  for (Track track : tracks) {
    RegistrationPayload payload{model_id, tracks, provider.ToJson()};
    std::string event_id = "reg:" + model_id + ":" + std::string(TrackId(track));
    acks.push_back(pipeline_.Enqueue(
        ArenaEvent::Registration(std::move(event_id), track, std::move(payload))));
  }
  return acks;
}

ProviderDescriptor ArenaEngine::DescriptorFor(const std::string& model_id) const {
  {
    std::lock_guard<std::mutex> lock(providers_mu_);
    auto it = providers_.find(model_id);
    if (it != providers_.end()) return it->second;
  }
  // Registered before a restart: the logged descriptor (no bearer token).
  auto reg = pipeline_.Registration(model_id);
  if (!reg) throw ArenaError(ErrorCode::kNotFound, "unknown model " + model_id);
  return ProviderDescriptor::FromJson(reg->provider);
}

Battle ArenaEngine::CreateBattle(Track track, const std::string& prompt,
                                 std::optional<std::uint64_t> pairing_seed) {
  if (prompt.empty()) throw ArenaError(ErrorCode::kValidation, "prompt is empty");
  std::vector<std::string> models = pipeline_.ModelsInTrack(track);
  if (models.size() < 2) {
    throw ArenaError(ErrorCode::kArenaNotReady,
                     std::string("fewer than 2 models in track ") +
                         std::string(TrackId(track)));
  }
  SplitMix64 rng(pairing_seed ? *pairing_seed : NextRandom());
  auto [i, j] = SelectPair(models.size(), pipeline_.PairCounts(track, models), rng);
  // Position is a coin flip so that "left" carries no information.
  if (rng.Next() & 1) std::swap(i, j);
  return Launch(track, prompt, models[i], models[j]);
}

Battle ArenaEngine::CreateBattleForPair(Track track, const std::string& prompt,
                                        const std::string& left,
                                        const std::string& right) {
  if (prompt.empty()) throw ArenaError(ErrorCode::kValidation, "prompt is empty");
  if (left == right) {
    throw ArenaError(ErrorCode::kValidation, "candidates must differ");
  }
  const std::vector<std::string> models = pipeline_.ModelsInTrack(track);
  for (const std::string* id : {&left, &right}) {
    if (!std::binary_search(models.begin(), models.end(), *id)) {
      throw ArenaError(ErrorCode::kNotFound,
                       "model " + *id + " is not in track " +
                           std::string(TrackId(track)));
    }
  }
  return Launch(track, prompt, left, right);
}

Battle ArenaEngine::Launch(Track track, const std::string& prompt,
                           std::string left, std::string right) {
  auto slot = std::make_shared<Slot>();
  Battle& b = slot->battle;
  b.track = track;
  b.prompt = prompt;
  b.candidate_left = std::move(left);
  b.candidate_right = std::move(right);
  b.created_at = clock_.Now();
  b.status = BattleStatus::kPendingResponses;
  {
    std::lock_guard<std::mutex> lock(battles_mu_);
    do {
      b.battle_id = "b-" + HexId(NextRandom());
    } while (battles_.count(b.battle_id) != 0);
    battles_.emplace(b.battle_id, slot);
  }
  {
    std::lock_guard<std::mutex> lock(fetch_mu_);
    ++fetches_in_flight_;
  }
  runner_([this, slot] { Fetch(slot); });
  std::lock_guard<std::mutex> lock(slot->mu);
  return slot->battle;
}

void ArenaEngine::Fetch(std::shared_ptr<Slot> slot) {
  Track track;
  std::string prompt;
  CandidateRequest left, right;
  {
    std::lock_guard<std::mutex> lock(slot->mu);
    track = slot->battle.track;
    prompt = slot->battle.prompt;
    left.model_id = slot->battle.candidate_left;
    right.model_id = slot->battle.candidate_right;
  }
  std::optional<std::pair<std::string, std::string>> responses;
  std::string error;
  try {
    left.descriptor = DescriptorFor(left.model_id);
    right.descriptor = DescriptorFor(right.model_id);
    responses = gateway_.FetchPair(left, right, track, prompt);
  } catch (const std::exception& e) {
    error = e.what();
  }
  {
    std::lock_guard<std::mutex> lock(slot->mu);
    Battle& b = slot->battle;
    if (b.status == BattleStatus::kPendingResponses) {
      if (responses) {
        b.response_left = std::move(responses->first);
        b.response_right = std::move(responses->second);
        b.status = BattleStatus::kAwaitingVote;
      } else {
        b.status = BattleStatus::kExpired;
        b.expiry_reason = "provider_error: " + error;
      }
    }
  }
  std::lock_guard<std::mutex> lock(fetch_mu_);
  if (--fetches_in_flight_ == 0) fetch_cv_.notify_all();
}

std::shared_ptr<ArenaEngine::Slot> ArenaEngine::Find(
    const std::string& battle_id) const {
  std::lock_guard<std::mutex> lock(battles_mu_);
  auto it = battles_.find(battle_id);
  return it == battles_.end() ? nullptr : it->second;
}

bool ArenaEngine::ExpiredLocked(Slot& slot, Timestamp now) const {
  Battle& b = slot.battle;
  if (b.status == BattleStatus::kExpired) return true;
  if (b.status == BattleStatus::kVoted) return false;
  if (now - b.created_at >= options_.battle_ttl) {
    b.status = BattleStatus::kExpired;
    b.expiry_reason = "ttl";
    return true;
  }
  return false;
}

std::optional<Battle> ArenaEngine::GetBattle(const std::string& battle_id) const {
  auto slot = Find(battle_id);
  if (!slot) return std::nullopt;
  std::lock_guard<std::mutex> lock(slot->mu);
  ExpiredLocked(*slot, clock_.Now());
  return slot->battle;
}

VoteReceipt ArenaEngine::CastVote(const std::string& battle_id, VoteChoice choice,
                                  const std::string& voter_id,
                                  std::optional<std::string> event_id) {
  auto slot = Find(battle_id);
  if (!slot) throw ArenaError(ErrorCode::kNotFound, "unknown battle " + battle_id);
  if (event_id && event_id->empty()) {
    throw ArenaError(ErrorCode::kValidation, "event_id must be nonempty");
  }

  std::lock_guard<std::mutex> lock(slot->mu);
  Battle& b = slot->battle;
  if (b.status == BattleStatus::kVoted) {
    if (event_id && *event_id == b.vote_event_id) return {*slot->ack, b};
    throw ArenaError(ErrorCode::kConflict, "battle already voted: " + battle_id);
  }
  if (ExpiredLocked(*slot, clock_.Now())) {
    throw ArenaError(ErrorCode::kConflict, "battle expired: " + battle_id);
  }
  if (b.status != BattleStatus::kAwaitingVote) {
    throw ArenaError(ErrorCode::kConflict, "responses not ready: " + battle_id);
  }
  if (choice == VoteChoice::kTie && !options_.tie_enabled) {
    throw ArenaError(ErrorCode::kValidation, "ties are disabled");
  }

  const Outcome outcome = choice == VoteChoice::kLeft    ? Outcome::Win()
                          : choice == VoteChoice::kRight ? Outcome::Loss()
                                                         : Outcome::Tie();
  VotePayload vote{b.battle_id, b.candidate_left, b.candidate_right,
                   outcome,     voter_id,         clock_.Now()};
  std::string id = event_id ? *event_id : "vote-" + HexId(NextRandom());
  Ack ack = pipeline_.Enqueue(ArenaEvent::Vote(id, b.track, std::move(vote)));
  // A recycled event_id yields some other event's ack.
  if (pipeline_.VoteForBattle(b.battle_id) != ack.event_id) {
    throw ArenaError(ErrorCode::kConflict, "event_id already used: " + id);
  }

  b.status = BattleStatus::kVoted;
  b.vote_event_id = ack.event_id;
  b.outcome = outcome;
  slot->ack = ack;
  return {ack, b};
}

std::size_t ArenaEngine::ExpireStale() {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard<std::mutex> lock(battles_mu_);
    slots.reserve(battles_.size());
    for (auto& [id, slot] : battles_) slots.push_back(slot);
  }
  const Timestamp now = clock_.Now();
  std::size_t expired = 0;
  for (auto& slot : slots) {
    std::lock_guard<std::mutex> lock(slot->mu);
    const bool was_open = slot->battle.status == BattleStatus::kPendingResponses ||
                          slot->battle.status == BattleStatus::kAwaitingVote;
    if (was_open && ExpiredLocked(*slot, now)) ++expired;
  }
  return expired;
}

}  // namespace arena
