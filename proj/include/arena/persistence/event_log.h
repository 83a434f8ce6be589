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

#ifndef ARENA_PERSISTENCE_EVENT_LOG_H_
#define ARENA_PERSISTENCE_EVENT_LOG_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "arena/core/clock.h"
#include "json.hpp"

namespace arena {

enum class SyncPolicy {
  // write(2) before Append returns. Survives a process crash.
  kFlushPerAppend,
  // write(2) plus fdatasync(2). Survives power loss.
  kFsyncPerAppend,
  // Appends are buffered and written by a background flusher at most
  // batch_window later. A crash can lose the last window of acknowledged
  // records, so this mode is meant for throughput measurements.
  kBatched,
};

struct LogOptions {
  SyncPolicy sync = SyncPolicy::kFlushPerAppend;
  // Clamped to [1 ms, 5 ms].
  Millis batch_window{5};
};

struct LogRecord {
  std::uint64_t position = 0;
  // Exact line content without the trailing newline.
  std::string text;
  nlohmann::json json;
};

// Throws ArenaError(kValidation) unless the record is an object carrying
// event_id (non-empty string), kind (string), seq (unsigned), enqueued_at
// (RFC 3339 string), payload (object) and optionally track (string).
void ValidateLogRecord(const nlohmann::json& record);

// Append-only JSON Lines log, one event per line. Single appender; Scan may
// run concurrently and sees an immutable prefix.
class EventLog {
 public:
  // Opens or creates the file. A partial last line left by a crash is
  // truncated away with a warning on stderr; positions continue after the
  // last complete record.
  static std::unique_ptr<EventLog> OpenFile(const std::filesystem::path& path,
                                            LogOptions options = {});
  // Non-durable log held in memory, for simulation and tests.
  static std::unique_ptr<EventLog> InMemory();

  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  // Validates, then appends. Returns the record's position (0-based).
  // Throws ArenaError(kValidation) for malformed records and
  // ArenaError(kIngest) when storage fails; nothing is appended in either case.
  std::uint64_t Append(const nlohmann::json& record);

  // Records at positions >= from, in append order. A complete line that does
  // not parse throws ArenaError(kCorruption) naming its position.
  std::vector<LogRecord> Scan(std::uint64_t from = 0) const;

  // Number of records, i.e. the next position.
  std::uint64_t size() const;

  // Pushes buffered bytes to the OS (batched mode only does work).
  void Flush();

  // False once a write has failed.
  bool Healthy() const { return healthy_.load(); }

  // Number of bytes dropped as a torn tail when the file was opened.
  std::uint64_t truncated_tail_bytes() const { return truncated_tail_bytes_; }

  bool in_memory() const { return fd_ < 0; }
  const std::filesystem::path& path() const { return path_; }

 private:
  EventLog() = default;

  void WriteAll(const char* data, std::size_t size) const;
  void FlushLocked() const;
  void FlusherLoop();

  std::filesystem::path path_;
  LogOptions options_;
  int fd_ = -1;

  mutable std::mutex mu_;
  std::vector<std::uint64_t> offsets_;  // byte offset of each line start
  std::uint64_t end_offset_ = 0;        // bytes handed to the OS or buffer
  std::vector<std::string> memory_;     // in-memory mode only
  mutable std::string pending_;         // batched mode buffer
  std::uint64_t truncated_tail_bytes_ = 0;
  mutable std::atomic<bool> healthy_{true};

  std::condition_variable flusher_cv_;
  bool stopping_ = false;
  std::thread flusher_;
};

// Optional full-state documents that bound replay time. Each document covers
// the log prefix [0, log_position) and is stored as
// <dir>/state-<log_position>.json.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path dir);

  void Write(std::uint64_t log_position, const nlohmann::json& document) const;

  struct Entry {
    std::uint64_t log_position = 0;
    nlohmann::json document;
  };
  std::optional<Entry> LoadLatest() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace arena

#endif  // ARENA_PERSISTENCE_EVENT_LOG_H_
