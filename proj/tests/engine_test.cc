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

#include <map>
#include <regex>
#include <set>

#include "arena/core/errors.h"
#include "arena/engine/arena_engine.h"
#include "black_hole.h"
#include "gtest/gtest.h"

namespace arena {
namespace {

using std::chrono::hours;
using std::chrono::milliseconds;

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const ArenaError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ArenaError thrown";
  return ErrorCode::kValidation;
}

class EngineTest : public ::testing::Test {
 protected:
  explicit EngineTest(EngineOptions options = {}) {
    PipelineOptions po;
    po.start_workers = false;
    pipeline_ = std::make_unique<EventPipeline>(*log_, UniformParams(), clock_, po);
    engine_ = std::make_unique<ArenaEngine>(*pipeline_, gateway_, clock_, InlineRunner(),
                                            options);
  }

  void RegisterN(int n, Track track = Track::kIdeation) {
    for (int i = 0; i < n; ++i) {
      engine_->RegisterModel("model-" + std::to_string(i), {track},
                             ProviderDescriptor::Fixture());
    }
    pipeline_->ProcessAll();
  }

  ManualClock clock_{Timestamp{} + hours(24 * 365 * 56)};
  std::unique_ptr<EventLog> log_ = EventLog::InMemory();
  ProviderGateway gateway_;
  std::unique_ptr<EventPipeline> pipeline_;
  std::unique_ptr<ArenaEngine> engine_;
};

class TieEngineTest : public EngineTest {
 protected:
  TieEngineTest() : EngineTest(EngineOptions{.tie_enabled = true}) {}
};

TEST_F(EngineTest, RegistrationCreatesBaselineStatesPerTrack) {
  auto acks = engine_->RegisterModel("m", {Track::kIdeation, Track::kReviewer},
                                     ProviderDescriptor::Fixture());
  EXPECT_EQ(acks.size(), 2u);
  pipeline_->ProcessAll();
  for (Track t : {Track::kIdeation, Track::kReviewer}) {
    auto s = pipeline_->RatingOf(t, "m");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->rating, 1000.0);
    EXPECT_EQ(s->match_count, 0);
  }
  EXPECT_FALSE(pipeline_->RatingOf(Track::kPaperQa, "m"));
}

TEST_F(EngineTest, RegistrationErrors) {
  engine_->RegisterModel("m", {Track::kIdeation}, ProviderDescriptor::Fixture());
  EXPECT_EQ(CodeOf([&] {
              engine_->RegisterModel("m", {Track::kReviewer}, ProviderDescriptor::Fixture());
            }),
            ErrorCode::kConflict);
  EXPECT_EQ(CodeOf([&] { engine_->RegisterModel("n", {}, ProviderDescriptor::Fixture()); }),
            ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] {
              engine_->RegisterModel("", {Track::kIdeation}, ProviderDescriptor::Fixture());
            }),
            ErrorCode::kValidation);
}

TEST_F(EngineTest, CreateBattlePreconditions) {
  EXPECT_EQ(CodeOf([&] { engine_->CreateBattle(Track::kIdeation, "p"); }),
            ErrorCode::kArenaNotReady);
  engine_->RegisterModel("solo", {Track::kIdeation}, ProviderDescriptor::Fixture());
  engine_->RegisterModel("elsewhere", {Track::kReviewer}, ProviderDescriptor::Fixture());
  EXPECT_EQ(CodeOf([&] { engine_->CreateBattle(Track::kIdeation, "p"); }),
            ErrorCode::kArenaNotReady);
  engine_->RegisterModel("second", {Track::kIdeation}, ProviderDescriptor::Fixture());
  EXPECT_NO_THROW(engine_->CreateBattle(Track::kIdeation, "p"));
  EXPECT_EQ(CodeOf([&] { engine_->CreateBattle(Track::kIdeation, ""); }),
            ErrorCode::kValidation);
}

TEST_F(EngineTest, BattleHasTwoDistinctModelsAndResponses) {
  RegisterN(3);
  Battle b = engine_->CreateBattle(Track::kIdeation, "ways to reduce MC variance", 7);
  EXPECT_NE(b.candidate_left, b.candidate_right);
  EXPECT_EQ(b.status, BattleStatus::kAwaitingVote);
  EXPECT_FALSE(b.response_left.empty());
  EXPECT_NE(b.response_left, b.response_right);
  // Same seed, same pair.
  Battle again = engine_->CreateBattle(Track::kIdeation, "ways to reduce MC variance", 7);
  EXPECT_EQ(again.candidate_left, b.candidate_left);
  EXPECT_EQ(again.candidate_right, b.candidate_right);
  EXPECT_NE(again.battle_id, b.battle_id);
}

TEST_F(EngineTest, SeededPairingCoversEveryPair) {
  RegisterN(5);
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, int> left_count;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Battle b = engine_->CreateBattle(Track::kIdeation, "p", seed);
    seen.insert(std::minmax(b.candidate_left, b.candidate_right));
    ++left_count[b.candidate_left];
  }
  EXPECT_EQ(seen.size(), 10u);
  // Each model is on the left about 2000 times.
  for (auto& [model, n] : left_count) EXPECT_NEAR(n, 2000, 250) << model;
}

TEST(SelectPairTest, LeastPlayedPairIsFavoured) {
  // Three models; pairs (0,1), (0,2), (1,2) with counts 0, 9, 99.
  const std::vector<std::int64_t> counts = {0, 9, 99};
  SplitMix64 rng(123);
  std::map<std::pair<std::size_t, std::size_t>, int> hits;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) ++hits[SelectPair(3, counts, rng)];
  // Weights 1, 0.1, 0.01 out of 1.11.
  auto share = [&](std::size_t i, std::size_t j) { return hits[std::make_pair(i, j)] / double(trials); };
  EXPECT_NEAR(share(0, 1), 1.0 / 1.11, 0.01);
  EXPECT_NEAR(share(0, 2), 0.1 / 1.11, 0.01);
  EXPECT_NEAR(share(1, 2), 0.01 / 1.11, 0.005);
  EXPECT_GT(share(0, 1), share(1, 2));
}

TEST(SelectPairTest, RejectsBadTables) {
  SplitMix64 rng(1);
  EXPECT_THROW(SelectPair(1, {}, rng), std::invalid_argument);
  EXPECT_THROW(SelectPair(3, {0, 0}, rng), std::invalid_argument);
}

TEST_F(EngineTest, VoterViewHidesIdentitiesUntilVote) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  const std::string view = VoterView(*engine_->GetBattle(b.battle_id), false).dump();
  EXPECT_EQ(view.find("model-0"), std::string::npos) << view;
  EXPECT_EQ(view.find("model-1"), std::string::npos) << view;
  EXPECT_NE(view.find("awaiting_vote"), std::string::npos);

  engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u1");
  const auto after = VoterView(*engine_->GetBattle(b.battle_id), false);
  EXPECT_EQ(after["revealed"]["left"], b.candidate_left);
  EXPECT_EQ(after["revealed"]["right"], b.candidate_right);
}

TEST_F(EngineTest, VoteMapsLeftToModelA) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  VoteReceipt r = engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u1");
  EXPECT_EQ(r.ack.seq, 3u);
  auto events = log_->Scan(0);
  const auto& payload = events.back().json["payload"];
  EXPECT_EQ(payload["model_a"], b.candidate_left);
  EXPECT_EQ(payload["model_b"], b.candidate_right);
  EXPECT_EQ(payload["score_a"], 1.0);
  EXPECT_EQ(payload["voter_id"], "u1");
  pipeline_->ProcessAll();
  EXPECT_NEAR(pipeline_->RatingOf(Track::kIdeation, b.candidate_left)->rating, 1016.0, 1e-9);
  EXPECT_NEAR(pipeline_->RatingOf(Track::kIdeation, b.candidate_right)->rating, 984.0, 1e-9);
}

TEST_F(EngineTest, RightVoteScoresZeroForLeft) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  engine_->CastVote(b.battle_id, VoteChoice::kRight, "u1");
  EXPECT_EQ(log_->Scan(0).back().json["payload"]["score_a"], 0.0);
}

TEST_F(EngineTest, FirstBattleOfNewModelIsColdStart) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u1");
  auto applied = pipeline_->ProcessNext(Track::kIdeation);
  ASSERT_TRUE(applied && applied->update);
  EXPECT_TRUE(applied->update->cold_start_applied);
}

TEST_F(EngineTest, SecondVoteConflictsAndRetryIsIdempotent) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  VoteReceipt first = engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u1", "client-1");
  const auto size = log_->size();
  VoteReceipt retry = engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u1", "client-1");
  EXPECT_EQ(first.ack, retry.ack);
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b.battle_id, VoteChoice::kRight, "u2"); }),
            ErrorCode::kConflict);
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b.battle_id, VoteChoice::kRight, "u2", "client-2"); }),
            ErrorCode::kConflict);
  EXPECT_EQ(log_->size(), size);
}

TEST_F(EngineTest, RecycledEventIdOnAnotherBattleConflicts) {
  RegisterN(2);
  Battle b1 = engine_->CreateBattle(Track::kIdeation, "prompt");
  Battle b2 = engine_->CreateBattle(Track::kIdeation, "prompt");
  engine_->CastVote(b1.battle_id, VoteChoice::kLeft, "u1", "same-id");
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b2.battle_id, VoteChoice::kLeft, "u1", "same-id"); }),
            ErrorCode::kConflict);
  EXPECT_EQ(engine_->GetBattle(b2.battle_id)->status, BattleStatus::kAwaitingVote);
}

TEST_F(EngineTest, UnknownBattleAndDisabledTie) {
  RegisterN(2);
  EXPECT_EQ(CodeOf([&] { engine_->CastVote("nope", VoteChoice::kLeft, "u"); }),
            ErrorCode::kNotFound);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b.battle_id, VoteChoice::kTie, "u"); }),
            ErrorCode::kValidation);
  EXPECT_EQ(engine_->GetBattle(b.battle_id)->status, BattleStatus::kAwaitingVote);
}

TEST_F(TieEngineTest, TieScoresOneHalf) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  engine_->CastVote(b.battle_id, VoteChoice::kTie, "u1");
  EXPECT_EQ(log_->Scan(0).back().json["payload"]["score_a"], 0.5);
  EXPECT_TRUE(VoterView(*engine_->GetBattle(b.battle_id), true)["tie_enabled"]);
}

TEST_F(EngineTest, StaleBattlesExpireWithoutRatingChange) {
  RegisterN(2);
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  clock_.Advance(hours(25));
  EXPECT_EQ(engine_->ExpireStale(), 1u);
  EXPECT_EQ(engine_->GetBattle(b.battle_id)->status, BattleStatus::kExpired);
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u"); }),
            ErrorCode::kConflict);
  EXPECT_EQ(log_->size(), 2u);
}

TEST_F(EngineTest, UnreachableProviderExpiresBattle) {
  arena::testing::BlackHole hole;
  engine_->RegisterModel("good", {Track::kIdeation}, ProviderDescriptor::Fixture());
  engine_->RegisterModel("stuck", {Track::kIdeation},
                         ProviderDescriptor::Http(hole.url(), milliseconds(200), 0));
  pipeline_->ProcessAll();
  const auto before = pipeline_->Current(Track::kIdeation);
  const auto log_size = log_->size();
  Battle b = engine_->CreateBattle(Track::kIdeation, "prompt");
  EXPECT_EQ(b.status, BattleStatus::kExpired);
  EXPECT_NE(b.expiry_reason.find("provider_error"), std::string::npos);
  EXPECT_EQ(CodeOf([&] { engine_->CastVote(b.battle_id, VoteChoice::kLeft, "u"); }),
            ErrorCode::kConflict);
  EXPECT_EQ(log_->size(), log_size);
  pipeline_->ProcessAll();
  EXPECT_EQ(pipeline_->Current(Track::kIdeation), before);
}

TEST_F(EngineTest, ResponsesFetchedOffThreadWithPool) {
  ThreadPool pool(2);
  ArenaEngine engine(*pipeline_, gateway_, clock_, pool.AsRunner());
  engine.RegisterModel("a", {Track::kReviewer}, ProviderDescriptor::Fixture());
  engine.RegisterModel("b", {Track::kReviewer}, ProviderDescriptor::Fixture());
  Battle b = engine.CreateBattle(Track::kReviewer, "prompt");
  engine.WaitForFetches();
  EXPECT_EQ(engine.GetBattle(b.battle_id)->status, BattleStatus::kAwaitingVote);
}

}  // namespace
}  // namespace arena
