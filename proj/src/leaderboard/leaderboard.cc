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

#include "arena/leaderboard/leaderboard.h"

#include <algorithm>
#include <cstring>

namespace arena {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void Mix(std::uint64_t* h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    *h ^= bytes[i];
    *h *= kFnvPrime;
  }
}

template <typename T>
void MixValue(std::uint64_t* h, T value) {
  Mix(h, &value, sizeof(value));
}

}  // namespace

std::uint64_t ComputeChecksum(const LeaderboardSnapshot& snapshot) {
  std::uint64_t h = kFnvOffset;
  MixValue(&h, static_cast<int>(snapshot.track));
  MixValue(&h, snapshot.version);
  MixValue(&h, snapshot.produced_by_seq);
  for (const auto& row : snapshot.rows) {
    MixValue(&h, row.rank);
    Mix(&h, row.model_id.data(), row.model_id.size());
    MixValue(&h, row.rating);
    MixValue(&h, row.match_count);
    MixValue(&h, row.is_cold_start);
  }
  return h;
}

std::vector<LeaderboardRow> RankRows(
    const std::vector<std::pair<std::string, RatingState>>& states,
    const RatingParams& params) {
  std::vector<LeaderboardRow> rows;
  rows.reserve(states.size());
  for (const auto& [id, state] : states) {
    rows.push_back(LeaderboardRow{0, id, state.rating, state.match_count,
                                  IsColdStart(state, params)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const LeaderboardRow& a, const LeaderboardRow& b) {
              if (a.rating != b.rating) return a.rating > b.rating;
              if (a.match_count != b.match_count) {
                return a.match_count > b.match_count;
              }
              return a.model_id < b.model_id;
            });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].rank = static_cast<int>(i + 1);
  }
  return rows;
}

Leaderboard::Leaderboard(Track track, std::size_t retention)
    : track_(track), retention_(std::max<std::size_t>(retention, 1)) {
  auto initial = std::make_shared<LeaderboardSnapshot>();
  initial->track = track;
  initial->checksum = ComputeChecksum(*initial);
  history_.push_back(std::move(initial));
}

std::shared_ptr<const LeaderboardSnapshot> Leaderboard::Publish(
    const std::vector<std::pair<std::string, RatingState>>& states,
    const RatingParams& params, std::uint64_t produced_by_seq) {
  auto next = std::make_shared<LeaderboardSnapshot>();
  next->track = track_;
  next->version = history_.back()->version + 1;
  next->produced_by_seq = produced_by_seq;
  next->rows = RankRows(states, params);
  next->checksum = ComputeChecksum(*next);
  history_.push_back(next);
  while (history_.size() > retention_) history_.pop_front();
  return next;
}

std::shared_ptr<const LeaderboardSnapshot> Leaderboard::Current() const {
  return history_.back();
}

std::shared_ptr<const LeaderboardSnapshot> Leaderboard::AtVersion(
    std::uint64_t version) const {
  for (const auto& snapshot : history_) {
    if (snapshot->version == version) return snapshot;
  }
  return nullptr;
}

void Leaderboard::Restore(std::shared_ptr<const LeaderboardSnapshot> snapshot) {
  history_.clear();
  history_.push_back(std::move(snapshot));
}

}  // namespace arena
