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

#include "arena/api/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "arena/core/errors.h"

namespace arena {

using nlohmann::json;

namespace {

[[noreturn]] void Invalid(const std::string& what) {
  throw ArenaError(ErrorCode::kValidation, "config: " + what);
}

double Number(const json& j, const char* key) {
  if (!j.is_number()) Invalid(std::string(key) + " must be a number");
  return j.get<double>();
}

std::int64_t Integer(const json& j, const char* key) {
  if (!j.is_number_integer()) Invalid(std::string(key) + " must be an integer");
  return j.get<std::int64_t>();
}

bool ParseBool(const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  Invalid("not a boolean: " + text);
}

std::int64_t ParseInt(const std::string& text, const char* key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Invalid(std::string(key) + " is not an integer: " + text);
}

}  // namespace

std::optional<SyncPolicy> ParseSyncPolicy(const std::string& name) {
  if (name == "flush") return SyncPolicy::kFlushPerAppend;
  if (name == "fsync") return SyncPolicy::kFsyncPerAppend;
  if (name == "batched") return SyncPolicy::kBatched;
  return std::nullopt;
}

RatingParams RatingParamsFromJson(const json& j, RatingParams p) {
  if (!j.is_object()) Invalid("rating params must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "base_rating") {
      p.base_rating = Number(value, "base_rating");
    } else if (key == "k_factor") {
      p.k_factor = Number(value, "k_factor");
    } else if (key == "cold_start_alpha") {
      p.cold_start_alpha = Number(value, "cold_start_alpha");
    } else if (key == "cold_start_window") {
      p.cold_start_window = Integer(value, "cold_start_window");
    } else if (key == "pair_decay_gamma") {
      p.pair_decay_gamma = Number(value, "pair_decay_gamma");
    } else if (key == "regression_lambda") {
      p.regression_lambda = Number(value, "regression_lambda");
    } else if (key == "inactivity_threshold_seconds") {
      p.inactivity_threshold = std::chrono::seconds(
          Integer(value, "inactivity_threshold_seconds"));
    } else {
      Invalid("unknown rating parameter " + key);
    }
  }
  return p;
}

json RatingParamsToJson(const RatingParams& p) {
  return {{"base_rating", p.base_rating},
          {"k_factor", p.k_factor},
          {"cold_start_alpha", p.cold_start_alpha},
          {"cold_start_window", p.cold_start_window},
          {"pair_decay_gamma", p.pair_decay_gamma},
          {"regression_lambda", p.regression_lambda},
          {"inactivity_threshold_seconds",
           std::chrono::duration_cast<std::chrono::seconds>(p.inactivity_threshold)
               .count()}};
}

ApiConfig ApiConfig::FromJson(const json& j) {
  if (!j.is_object()) Invalid("top level must be an object");
  ApiConfig c;
  auto str = [](const json& v, const char* key) {
    if (!v.is_string()) Invalid(std::string(key) + " must be a string");
    return v.get<std::string>();
  };
  auto positive = [](std::int64_t v, const char* key) {
    if (v <= 0) Invalid(std::string(key) + " must be positive");
    return v;
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "listen_address") {
      c.listen_address = str(value, "listen_address");
    } else if (key == "rating_params") {
      if (!value.is_object()) Invalid("rating_params must be an object");
      RatingParams base;
      if (auto it = value.find("default"); it != value.end()) {
        base = RatingParamsFromJson(*it);
      }
      c.rating_params = UniformParams(base);
      for (const auto& [track_key, overrides] : value.items()) {
        if (track_key == "default") continue;
        auto track = ParseTrack(track_key);
        if (!track) Invalid("unknown track " + track_key);
        c.rating_params[TrackIndex(*track)] = RatingParamsFromJson(overrides, base);
      }
    } else if (key == "tie_enabled") {
      if (!value.is_boolean()) Invalid("tie_enabled must be a boolean");
      c.tie_enabled = value.get<bool>();
    } else if (key == "battle_ttl_seconds") {
      c.battle_ttl = std::chrono::seconds(positive(Integer(value, key.c_str()), "battle_ttl_seconds"));
    } else if (key == "regression_tick_interval_seconds") {
      c.regression_tick_interval = std::chrono::seconds(
          positive(Integer(value, key.c_str()), "regression_tick_interval_seconds"));
    } else if (key == "log_path") {
      c.log_path = str(value, "log_path");
    } else if (key == "snapshot_dir") {
      c.snapshot_dir = str(value, "snapshot_dir");
    } else if (key == "snapshot_interval_seconds") {
      c.snapshot_interval = std::chrono::seconds(
          positive(Integer(value, key.c_str()), "snapshot_interval_seconds"));
    } else if (key == "admin_token") {
      c.admin_token = str(value, "admin_token");
    } else if (key == "queue_capacity") {
      c.queue_capacity = static_cast<std::size_t>(
          positive(Integer(value, key.c_str()), "queue_capacity"));
    } else if (key == "backpressure") {
      const std::string mode = str(value, "backpressure");
      if (mode == "reject") {
        c.backpressure = BackpressureMode::kReject;
      } else if (mode == "block") {
        c.backpressure = BackpressureMode::kBlock;
      } else {
        Invalid("backpressure must be reject or block");
      }
    } else if (key == "sync_policy") {
      auto policy = ParseSyncPolicy(str(value, "sync_policy"));
      if (!policy) Invalid("sync_policy must be flush, fsync or batched");
      c.sync_policy = *policy;
    } else if (key == "fetch_threads") {
      c.fetch_threads = static_cast<std::size_t>(
          positive(Integer(value, key.c_str()), "fetch_threads"));
    } else {
      Invalid("unknown key " + key);
    }
  }
  c.Validate();
  return c;
}

ApiConfig ApiConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) Invalid("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return FromJson(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    Invalid(path + " is not valid JSON: " + e.what());
  }
}

void ApiConfig::ApplyEnvironment(
    const std::function<const char*(const char*)>& getenv_fn) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    const char* v = getenv_fn ? getenv_fn(name) : std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("ARENA_LISTEN_ADDRESS")) listen_address = *v;
  if (auto v = get("ARENA_TIE_ENABLED")) tie_enabled = ParseBool(*v);
  if (auto v = get("ARENA_BATTLE_TTL_SECONDS")) {
    battle_ttl = std::chrono::seconds(ParseInt(*v, "ARENA_BATTLE_TTL_SECONDS"));
  }
  if (auto v = get("ARENA_REGRESSION_TICK_INTERVAL_SECONDS")) {
    regression_tick_interval = std::chrono::seconds(
        ParseInt(*v, "ARENA_REGRESSION_TICK_INTERVAL_SECONDS"));
  }
  if (auto v = get("ARENA_LOG_PATH")) log_path = *v;
  if (auto v = get("ARENA_SNAPSHOT_DIR")) snapshot_dir = *v;
  if (auto v = get("ARENA_ADMIN_TOKEN")) admin_token = *v;
  if (auto v = get("ARENA_QUEUE_CAPACITY")) {
    queue_capacity = static_cast<std::size_t>(ParseInt(*v, "ARENA_QUEUE_CAPACITY"));
  }
  if (auto v = get("ARENA_SYNC_POLICY")) {
    auto policy = ParseSyncPolicy(*v);
    if (!policy) Invalid("ARENA_SYNC_POLICY must be flush, fsync or batched");
    sync_policy = *policy;
  }
  Validate();
}

void ApiConfig::Validate() const {
  for (const RatingParams& p : rating_params) {
    try {
      p.Validate();
    } catch (const std::invalid_argument& e) {
      Invalid(e.what());
    }
  }
  if (listen_address.find(':') == std::string::npos) {
    Invalid("listen_address must be host:port");
  }
  if (battle_ttl.count() <= 0) Invalid("battle_ttl_seconds must be positive");
  if (regression_tick_interval.count() <= 0) {
    Invalid("regression_tick_interval_seconds must be positive");
  }
  if (queue_capacity == 0) Invalid("queue_capacity must be positive");
}

}  // namespace arena
