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

#ifndef ARENA_API_SERVICE_H_
#define ARENA_API_SERVICE_H_

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "arena/api/config.h"
#include "arena/core/clock.h"
#include "arena/core/errors.h"
#include "arena/core/thread_pool.h"
#include "arena/engine/arena_engine.h"
#include "arena/persistence/event_log.h"
#include "arena/pipeline/event_pipeline.h"
#include "arena/provider/provider.h"
#include "json.hpp"

namespace arena {

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  // Lower-case header names.
  std::map<std::string, std::string> headers;
  std::map<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body = nlohmann::json::object();
};

// Maps ArenaError codes to HTTP status codes.
int HttpStatusFor(ErrorCode code);

nlohmann::json SnapshotToJson(const LeaderboardSnapshot& snapshot);

// The whole arena behind a transport-neutral router. ApiServer puts it on
// HTTP; tests call Handle() directly.
//
//   POST /battles                  {track, prompt}          201 battle view
//   GET  /battles/{id}                                      200 battle view
//   POST /battles/{id}/vote        {choice, voter_id}       202 receipt
//   GET  /leaderboard/{track}      [?version=N]             200 snapshot
//   POST /models                   {model_id, tracks, provider}  201
//   GET  /tracks                                            200
//   GET  /healthz                                           200 or 503
//   POST /admin/regression-tick    [{as_of}]                202
//
// Errors carry {"code": <machine-readable>, "message": <text>}.
class ArenaService {
 public:
  // `clock` must outlive the service; nullptr uses the system clock.
  explicit ArenaService(ApiConfig config, const Clock* clock = nullptr);
  // Stops the maintenance thread, writes a final snapshot when configured.
  ~ArenaService();

  ArenaService(const ArenaService&) = delete;
  ArenaService& operator=(const ArenaService&) = delete;

  ApiResponse Handle(const ApiRequest& request);

  // Injects a regression tick, as the timer does.
  Ack InjectRegressionTick(std::optional<Timestamp> as_of = {});

  EventPipeline& pipeline() { return *pipeline_; }
  ArenaEngine& engine() { return *engine_; }
  const ApiConfig& config() const { return config_; }
  bool Healthy() const;

 private:
  ApiResponse Route(const ApiRequest& request);
  ApiResponse CreateBattle(const nlohmann::json& body);
  ApiResponse GetBattle(const std::string& id);
  ApiResponse Vote(const std::string& id, const nlohmann::json& body);
  ApiResponse GetLeaderboard(const std::string& track, const ApiRequest& request);
  ApiResponse RegisterModel(const nlohmann::json& body);
  ApiResponse AdminTick(const nlohmann::json& body);
  ApiResponse Tracks() const;
  ApiResponse Health() const;
  void RequireAdmin(const ApiRequest& request) const;
  void MaintenanceLoop();

  ApiConfig config_;
  SystemClock system_clock_;
  const Clock& clock_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<SnapshotStore> snapshots_;
  std::unique_ptr<EventPipeline> pipeline_;
  ProviderGateway gateway_;
  ThreadPool fetch_pool_;
  std::unique_ptr<ArenaEngine> engine_;

  std::mutex tick_mu_;
  std::uint64_t tick_counter_ = 0;

  std::mutex maintenance_mu_;
  std::condition_variable maintenance_cv_;
  bool stopping_ = false;
  std::thread maintenance_;
};

}  // namespace arena

#endif  // ARENA_API_SERVICE_H_
