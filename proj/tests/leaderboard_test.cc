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

#include <atomic>
#include <thread>

#include "arena/leaderboard/leaderboard.h"
#include "gtest/gtest.h"

namespace arena {
namespace {

using States = std::vector<std::pair<std::string, RatingState>>;

RatingState At(double rating, std::int64_t matches = 40) {
  RatingState s;
  s.rating = rating;
  s.match_count = matches;
  return s;
}

TEST(RankRowsTest, SortsByRatingDescending) {
  RatingParams p;
  auto rows = RankRows({{"c", At(984)}, {"a", At(1016)}, {"b", At(1000)}}, p);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].model_id, "a");
  EXPECT_EQ(rows[1].model_id, "b");
  EXPECT_EQ(rows[2].model_id, "c");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rows[i].rank, i + 1);
}

TEST(RankRowsTest, TieBreakMatchCountThenId) {
  RatingParams p;
  auto rows = RankRows(
      {{"zeta", At(1000, 5)}, {"beta", At(1000, 5)}, {"alpha", At(1000, 2)}}, p);
  EXPECT_EQ(rows[0].model_id, "beta");
  EXPECT_EQ(rows[1].model_id, "zeta");
  EXPECT_EQ(rows[2].model_id, "alpha");
}

TEST(RankRowsTest, ColdStartFlagFollowsWindow) {
  RatingParams p;
  auto rows = RankRows({{"new", At(1000, 0)}, {"old", At(990, 30)}}, p);
  EXPECT_TRUE(rows[0].is_cold_start);
  EXPECT_FALSE(rows[1].is_cold_start);
}

TEST(LeaderboardTest, VersionsIncrementByOne) {
  Leaderboard board(Track::kIdeation);
  RatingParams p;
  EXPECT_EQ(board.Current()->version, 0u);
  EXPECT_TRUE(board.Current()->rows.empty());
  auto v1 = board.Publish({{"a", At(1000)}}, p, 1);
  auto v2 = board.Publish({{"a", At(1016)}}, p, 2);
  EXPECT_EQ(v1->version, 1u);
  EXPECT_EQ(v2->version, 2u);
  EXPECT_EQ(v2->produced_by_seq, 2u);
  // The older snapshot is unchanged.
  EXPECT_EQ(v1->rows[0].rating, 1000.0);
  EXPECT_EQ(board.AtVersion(1), v1);
  EXPECT_EQ(ComputeChecksum(*v1), v1->checksum);
}

TEST(LeaderboardTest, RetentionDropsOldVersions) {
  Leaderboard board(Track::kReviewer, 4);
  RatingParams p;
  for (std::uint64_t i = 1; i <= 10; ++i) board.Publish({{"a", At(1000)}}, p, i);
  EXPECT_EQ(board.AtVersion(6), nullptr);
  EXPECT_NE(board.AtVersion(7), nullptr);
  EXPECT_NE(board.AtVersion(10), nullptr);
  EXPECT_EQ(board.AtVersion(11), nullptr);
}

// Readers copy the shared pointer under a lock and then inspect the rows
// without it; every snapshot they see must match its checksum and be sorted.
TEST(LeaderboardTest, ConcurrentReadersSeeConsistentSnapshots) {
  Leaderboard board(Track::kPaperQa);
  RatingParams p;
  std::mutex mu;
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::atomic<long> reads{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      std::uint64_t last_version = 0;
      while (!done.load()) {
        std::shared_ptr<const LeaderboardSnapshot> snap;
        {
          std::lock_guard<std::mutex> lock(mu);
          snap = board.Current();
        }
        if (snap->version < last_version) ++bad;
        last_version = snap->version;
        if (ComputeChecksum(*snap) != snap->checksum) ++bad;
        for (std::size_t i = 1; i < snap->rows.size(); ++i) {
          if (snap->rows[i - 1].rating < snap->rows[i].rating) ++bad;
          if (snap->rows[i].rank != static_cast<int>(i) + 1) ++bad;
        }
        ++reads;
      }
    });
  }
  States states;
  for (int m = 0; m < 20; ++m) states.push_back({"m" + std::to_string(m), At(1000)});
  for (std::uint64_t i = 1; i <= 5000; ++i) {
    states[i % 20].second.rating += (i % 3 == 0 ? -7.0 : 5.0);
    std::lock_guard<std::mutex> lock(mu);
    board.Publish(states, p, i);
  }
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_GT(reads.load(), 0);
}

}  // namespace
}  // namespace arena
