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

#include "arena/core/track.h"

namespace arena {
namespace {

struct TrackNames {
  std::string_view id;
  std::string_view display;
};

constexpr std::array<TrackNames, kTrackCount> kNames = {{
    {"literature_review", "Literature Review"},
    {"ideation", "Ideation"},
    {"hypothesis_generation", "Hypothesis Generation"},
    {"reviewer", "Reviewer"},
    {"paper_qa", "PaperQA"},
    {"author_qa", "AuthorQA"},
}};

}  // namespace

std::string_view TrackId(Track track) { return kNames[TrackIndex(track)].id; }

std::string_view TrackDisplayName(Track track) {
  return kNames[TrackIndex(track)].display;
}

std::optional<Track> ParseTrack(std::string_view id) {
  for (Track track : kAllTracks) {
    if (TrackId(track) == id) return track;
  }
  return std::nullopt;
}

}  // namespace arena
