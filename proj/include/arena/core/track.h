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

#ifndef ARENA_CORE_TRACK_H_
#define ARENA_CORE_TRACK_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace arena {

// The six evaluation categories. Each track keeps its own ratings, pair
// history and leaderboard.
enum class Track {
  kLiteratureReview,
  kIdeation,
  kHypothesisGeneration,
  kReviewer,
  kPaperQa,
  kAuthorQa,
};

inline constexpr std::array<Track, 6> kAllTracks = {
    Track::kLiteratureReview, Track::kIdeation, Track::kHypothesisGeneration,
    Track::kReviewer,         Track::kPaperQa,  Track::kAuthorQa,
};

inline constexpr std::size_t kTrackCount = kAllTracks.size();

constexpr std::size_t TrackIndex(Track track) {
  return static_cast<std::size_t>(track);
}

// Canonical wire identifier, e.g. "paper_qa".
std::string_view TrackId(Track track);

std::string_view TrackDisplayName(Track track);

// Accepts canonical identifiers only.
std::optional<Track> ParseTrack(std::string_view id);

}  // namespace arena

#endif  // ARENA_CORE_TRACK_H_
