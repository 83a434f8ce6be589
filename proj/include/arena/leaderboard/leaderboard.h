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

#ifndef ARENA_LEADERBOARD_LEADERBOARD_H_
#define ARENA_LEADERBOARD_LEADERBOARD_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "arena/core/track.h"
#include "arena/rating/elo.h"

namespace arena {

struct LeaderboardRow {
  int rank = 0;
  std::string model_id;
  double rating = 0.0;
  std::int64_t match_count = 0;
  bool is_cold_start = false;

  bool operator==(const LeaderboardRow&) const = default;
};

// Immutable once published; shared between the writer and any readers.
struct LeaderboardSnapshot {
  Track track = Track::kIdeation;
  std::uint64_t version = 0;
  std::uint64_t produced_by_seq = 0;
  std::vector<LeaderboardRow> rows;
  // FNV-1a over every field above, set at publish time.
  std::uint64_t checksum = 0;
};

std::uint64_t ComputeChecksum(const LeaderboardSnapshot& snapshot);

// Sorts by rating desc, match_count desc, model_id asc and assigns ranks 1..N.
std::vector<LeaderboardRow> RankRows(
    const std::vector<std::pair<std::string, RatingState>>& states,
    const RatingParams& params);

// Versioned snapshots for one track. Publish() is called by the track's
// single writer; readers take shared_ptr copies and never see mutation.
// Not internally synchronized: the owner serializes access to the history.
class Leaderboard {
 public:
  static constexpr std::size_t kDefaultRetention = 64;

  explicit Leaderboard(Track track,
                       std::size_t retention = kDefaultRetention);

  std::shared_ptr<const LeaderboardSnapshot> Publish(
      const std::vector<std::pair<std::string, RatingState>>& states,
      const RatingParams& params, std::uint64_t produced_by_seq);

  // Version 0 (empty rows) before the first publish.
  std::shared_ptr<const LeaderboardSnapshot> Current() const;

  // nullptr when the version has fallen out of retention or never existed.
  std::shared_ptr<const LeaderboardSnapshot> AtVersion(
      std::uint64_t version) const;

  // Used when restoring from a state snapshot.
  void Restore(std::shared_ptr<const LeaderboardSnapshot> snapshot);

  Track track() const { return track_; }
  std::size_t retention() const { return retention_; }

 private:
  Track track_;
  std::size_t retention_;
  std::deque<std::shared_ptr<const LeaderboardSnapshot>> history_;
};

}  // namespace arena

#endif  // ARENA_LEADERBOARD_LEADERBOARD_H_
