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

#include "arena/persistence/event_log.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "arena/core/errors.h"

namespace arena {
namespace {

[[noreturn]] void Malformed(const std::string& what) {
  throw ArenaError(ErrorCode::kValidation, "malformed log record: " + what);
}

}  // namespace

void ValidateLogRecord(const nlohmann::json& record) {
  if (!record.is_object()) Malformed("not an object");
  auto field = [&](const char* name) -> const nlohmann::json& {
    auto it = record.find(name);
    if (it == record.end()) Malformed(std::string("missing ") + name);
    return *it;
  };
  const auto& event_id = field("event_id");
  if (!event_id.is_string() || event_id.get_ref<const std::string&>().empty()) {
    Malformed("event_id must be a non-empty string");
  }
  if (!field("kind").is_string()) Malformed("kind must be a string");
  const nlohmann::json& seq = field("seq");
  if (!seq.is_number_integer() || seq.get<std::int64_t>() < 0) {
    Malformed("seq must be a nonnegative integer");
  }
  const auto& enqueued_at = field("enqueued_at");
  if (!enqueued_at.is_string() ||
      !ParseRfc3339(enqueued_at.get_ref<const std::string&>())) {
    Malformed("enqueued_at must be an RFC 3339 timestamp");
  }
  if (!field("payload").is_object()) Malformed("payload must be an object");
  if (auto it = record.find("track"); it != record.end() && !it->is_string()) {
    Malformed("track must be a string");
  }
}

std::unique_ptr<EventLog> EventLog::InMemory() {
  return std::unique_ptr<EventLog>(new EventLog());
}

std::unique_ptr<EventLog> EventLog::OpenFile(const std::filesystem::path& path,
                                             LogOptions options) {
  std::unique_ptr<EventLog> log(new EventLog());
  log->path_ = path;
  options.batch_window = std::clamp(options.batch_window, Millis{1}, Millis{5});
  log->options_ = options;

  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  log->fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log->fd_ < 0) {
    throw ArenaError(ErrorCode::kIngest, "cannot open log " + path.string() +
                                             ": " + std::strerror(errno));
  }

  // Index complete lines; anything after the last newline is a torn tail.
  std::ifstream in(path, std::ios::binary);
  std::uint64_t offset = 0;
  std::uint64_t line_start = 0;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      if (buf[i] == '\n') {
        log->offsets_.push_back(line_start);
        line_start = offset + i + 1;
      }
    }
    offset += got;
  }
  if (line_start < offset) {
    log->truncated_tail_bytes_ = offset - line_start;
    std::cerr << "[arena] warning: truncating torn tail of "
              << log->truncated_tail_bytes_ << " bytes at record "
              << log->offsets_.size() << " in " << path << "\n";
    if (::ftruncate(log->fd_, static_cast<off_t>(line_start)) != 0) {
      throw ArenaError(ErrorCode::kIngest, "cannot truncate torn tail of " +
                                               path.string());
    }
  }
  log->end_offset_ = line_start;

  if (options.sync == SyncPolicy::kBatched) {
    log->flusher_ = std::thread([raw = log.get()] { raw->FlusherLoop(); });
  }
  return log;
}

EventLog::~EventLog() {
  if (flusher_.joinable()) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stopping_ = true;
    }
    flusher_cv_.notify_all();
    flusher_.join();
  }
  if (fd_ >= 0) {
    std::lock_guard<std::mutex> lock(mu_);
    try {
      FlushLocked();
    } catch (const ArenaError&) {
      // Already reported through Healthy().
    }
    ::close(fd_);
  }
}

void EventLog::WriteAll(const char* data, std::size_t size) const {
  while (size > 0) {
    ssize_t n = ::write(fd_, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      healthy_ = false;
      throw ArenaError(ErrorCode::kIngest,
                       std::string("log write failed: ") + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

std::uint64_t EventLog::Append(const nlohmann::json& record) {
  ValidateLogRecord(record);
  std::string line = record.dump();
  line.push_back('\n');

  std::lock_guard<std::mutex> lock(mu_);
  const std::uint64_t position =
      in_memory() ? memory_.size() : offsets_.size();
  if (in_memory()) {
    line.pop_back();
    memory_.push_back(std::move(line));
    return position;
  }
  if (!healthy_) throw ArenaError(ErrorCode::kIngest, "log is not writable");

  switch (options_.sync) {
    case SyncPolicy::kFlushPerAppend:
      WriteAll(line.data(), line.size());
      break;
    case SyncPolicy::kFsyncPerAppend:
      WriteAll(line.data(), line.size());
      if (::fdatasync(fd_) != 0) {
        healthy_ = false;
        throw ArenaError(ErrorCode::kIngest, "log fdatasync failed");
      }
      break;
    case SyncPolicy::kBatched:
      pending_.append(line);
      break;
  }
  offsets_.push_back(end_offset_);
  end_offset_ += line.size();
  return position;
}

void EventLog::FlushLocked() const {
  if (pending_.empty() || fd_ < 0) return;
  std::string data;
  data.swap(pending_);
  WriteAll(data.data(), data.size());
}

void EventLog::Flush() {
  std::lock_guard<std::mutex> lock(mu_);
  FlushLocked();
}

void EventLog::FlusherLoop() {
  std::unique_lock<std::mutex> lock(mu_);
  while (!stopping_) {
    flusher_cv_.wait_for(lock, options_.batch_window);
    try {
      FlushLocked();
    } catch (const ArenaError& e) {
      std::cerr << "[arena] error: " << e.what() << "\n";
    }
  }
}

std::uint64_t EventLog::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return in_memory() ? memory_.size() : offsets_.size();
}

std::vector<LogRecord> EventLog::Scan(std::uint64_t from) const {
  std::vector<LogRecord> out;
  auto parse = [&](std::uint64_t position, std::string text) {
    LogRecord record;
    record.position = position;
    try {
      record.json = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ArenaError(ErrorCode::kCorruption,
                       "log corrupt at position " + std::to_string(position) +
                           ": " + e.what());
    }
    record.text = std::move(text);
    out.push_back(std::move(record));
  };

  if (in_memory()) {
    std::vector<std::string> lines;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (from > memory_.size()) {
        throw ArenaError(ErrorCode::kValidation, "scan position past end");
      }
      if (from < memory_.size()) {
        lines.assign(memory_.begin() + static_cast<std::ptrdiff_t>(from),
                     memory_.end());
      }
    }
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      parse(from + i, std::move(lines[i]));
    }
    return out;
  }

  std::uint64_t start_offset = 0;
  std::uint64_t count = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    // Only the prefix already handed to the OS is readable from disk.
    FlushLocked();
    if (from > offsets_.size()) {
      throw ArenaError(ErrorCode::kValidation, "scan position past end");
    }
    if (from == offsets_.size()) return out;
    start_offset = offsets_[from];
    count = offsets_.size() - from;
  }
  std::ifstream in(path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(start_offset));
  std::string line;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw ArenaError(ErrorCode::kCorruption,
                       "log truncated at position " + std::to_string(from + i));
    }
    parse(from + i, line);
  }
  return out;
}

SnapshotStore::SnapshotStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void SnapshotStore::Write(std::uint64_t log_position,
                          const nlohmann::json& document) const {
  const auto final_path =
      dir_ / ("state-" + std::to_string(log_position) + ".json");
  const auto tmp_path = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << document.dump();
    out.flush();
    if (!out) {
      throw ArenaError(ErrorCode::kIngest,
                       "cannot write snapshot " + final_path.string());
    }
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::optional<SnapshotStore::Entry> SnapshotStore::LoadLatest() const {
  std::optional<std::uint64_t> best;
  std::filesystem::path best_path;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("state-", 0) != 0 || entry.path().extension() != ".json") {
      continue;
    }
    const std::string digits = name.substr(6, name.size() - 6 - 5);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      continue;
    }
    const std::uint64_t position = std::stoull(digits);
    if (!best || position > *best) {
      best = position;
      best_path = entry.path();
    }
  }
  if (!best) return std::nullopt;
  std::ifstream in(best_path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Entry{*best, nlohmann::json::parse(buffer.str())};
  } catch (const nlohmann::json::parse_error& e) {
    throw ArenaError(ErrorCode::kCorruption,
                     "snapshot " + best_path.string() + " unreadable: " + e.what());
  }
}

}  // namespace arena
