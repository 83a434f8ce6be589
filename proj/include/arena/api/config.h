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

#ifndef ARENA_API_CONFIG_H_
#define ARENA_API_CONFIG_H_

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "arena/persistence/event_log.h"
#include "arena/pipeline/arena_state.h"
#include "arena/pipeline/event_pipeline.h"
#include "json.hpp"

namespace arena {

// Service configuration. File keys match the field names; durations are
// given in seconds ("battle_ttl_seconds", ...). Example:
//
//   {
//     "listen_address": "0.0.0.0:8080",
//     "rating_params": {"default": {"k_factor": 24},
//                       "reviewer": {"cold_start_alpha": 2.0}},
//     "tie_enabled": true,
//     "log_path": "data/events.jsonl",
//     "snapshot_dir": "data/snapshots"
//   }
struct ApiConfig {
  std::string listen_address = "127.0.0.1:8080";
  // One entry per track: the "default" block with the track's block on top.
  TrackParamsTable rating_params = UniformParams();
  bool tie_enabled = false;
  std::chrono::seconds battle_ttl{24 * 3600};
  std::chrono::seconds regression_tick_interval{24 * 3600};
  // Empty means an in-memory, non-durable log.
  std::string log_path;
  // Empty disables state snapshots.
  std::string snapshot_dir;
  std::chrono::seconds snapshot_interval{3600};
  // Guards /models and /admin when set.
  std::string admin_token;
  std::size_t queue_capacity = 8192;
  BackpressureMode backpressure = BackpressureMode::kReject;
  SyncPolicy sync_policy = SyncPolicy::kFlushPerAppend;
  std::size_t fetch_threads = 4;

  // Unknown keys and non-canonical track names are validation errors.
  static ApiConfig FromJson(const nlohmann::json& j);
  static ApiConfig Load(const std::string& path);

  // ARENA_<KEY> variables, e.g. ARENA_LISTEN_ADDRESS, ARENA_TIE_ENABLED,
  // ARENA_LOG_PATH. `getenv` is injectable for tests.
  void ApplyEnvironment(
      const std::function<const char*(const char*)>& getenv = nullptr);

  // Throws ArenaError(kValidation).
  void Validate() const;
};

// RatingParams <-> JSON with keys base_rating, k_factor, cold_start_alpha,
// cold_start_window, pair_decay_gamma, regression_lambda and
// inactivity_threshold_seconds. Missing keys keep the values of `base`.
RatingParams RatingParamsFromJson(const nlohmann::json& j, RatingParams base = {});
nlohmann::json RatingParamsToJson(const RatingParams& params);

std::optional<SyncPolicy> ParseSyncPolicy(const std::string& name);

}  // namespace arena

#endif  // ARENA_API_CONFIG_H_
