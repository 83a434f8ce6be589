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

#include <algorithm>
#include <fstream>
#include <functional>
#include <thread>
#include <sstream>

#include "arena/core/errors.h"
#include "arena/persistence/event_log.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace arena {
namespace {

using nlohmann::json;
using ::arena::testing::TempDir;

json Record(int seq) {
  return {{"event_id", "e" + std::to_string(seq)},
          {"kind", "vote"},
          {"track", "ideation"},
          {"seq", seq},
          {"enqueued_at", "2026-01-01T00:00:00.000Z"},
          {"payload", {{"n", seq}}}};
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const ArenaError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ArenaError thrown";
  return ErrorCode::kValidation;
}

TEST(EventLogTest, FirstAppendIsPositionZero) {
  TempDir dir;
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  EXPECT_EQ(log->Append(Record(1)), 0u);
  EXPECT_EQ(log->Append(Record(2)), 1u);
  EXPECT_EQ(log->size(), 2u);
}

TEST(EventLogTest, ScanReturnsRecordsInOrderAndRoundTrips) {
  TempDir dir;
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  for (int i = 1; i <= 3; ++i) log->Append(Record(i));
  auto records = log->Scan(0);
  ASSERT_EQ(records.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(records[i].position, static_cast<std::uint64_t>(i));
    EXPECT_EQ(records[i].json, Record(i + 1));
    EXPECT_EQ(records[i].text, Record(i + 1).dump());
  }
  EXPECT_EQ(log->Scan(1).size(), 2u);
  EXPECT_TRUE(log->Scan(3).empty());
  EXPECT_EQ(CodeOf([&] { log->Scan(4); }), ErrorCode::kValidation);
  // Bytes on disk are exactly one line per record.
  EXPECT_EQ(ReadFile(dir / "events.jsonl"),
            Record(1).dump() + "\n" + Record(2).dump() + "\n" + Record(3).dump() + "\n");
}

TEST(EventLogTest, ReopenContinuesPositions) {
  TempDir dir;
  {
    auto log = EventLog::OpenFile(dir / "events.jsonl");
    log->Append(Record(1));
    log->Append(Record(2));
  }
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  EXPECT_EQ(log->size(), 2u);
  EXPECT_EQ(log->Append(Record(3)), 2u);
  EXPECT_EQ(log->Scan(0).size(), 3u);
}

TEST(EventLogTest, TornTailIsTruncated) {
  TempDir dir;
  {
    auto log = EventLog::OpenFile(dir / "events.jsonl");
    for (int i = 1; i <= 3; ++i) log->Append(Record(i));
  }
  {
    std::ofstream out(dir / "events.jsonl", std::ios::app | std::ios::binary);
    out << R"({"event_id":"e4","kind":"vo)";
  }
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  EXPECT_GT(log->truncated_tail_bytes(), 0u);
  EXPECT_EQ(log->Scan(0).size(), 3u);
  EXPECT_EQ(log->Append(Record(4)), 3u);
  auto records = log->Scan(0);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[3].json, Record(4));
}

TEST(EventLogTest, MidFileCorruptionNamesPosition) {
  TempDir dir;
  {
    std::ofstream out(dir / "events.jsonl", std::ios::binary);
    out << Record(1).dump() << "\n" << "{not json\n" << Record(3).dump() << "\n";
  }
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  try {
    log->Scan(0);
    FAIL() << "expected corruption";
  } catch (const ArenaError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruption);
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos) << e.what();
  }
}

TEST(EventLogTest, MalformedRecordsRejectedBeforeWrite) {
  TempDir dir;
  auto log = EventLog::OpenFile(dir / "events.jsonl");
  json missing = Record(1);
  missing.erase("event_id");
  json bad_time = Record(1);
  bad_time["enqueued_at"] = "yesterday";
  json bad_seq = Record(1);
  bad_seq["seq"] = -1;
  json bad_payload = Record(1);
  bad_payload["payload"] = "text";
  for (const json& r : {missing, bad_time, bad_seq, bad_payload, json::array()}) {
    EXPECT_EQ(CodeOf([&] { log->Append(r); }), ErrorCode::kValidation) << r.dump();
  }
  EXPECT_EQ(log->size(), 0u);
  EXPECT_EQ(ReadFile(dir / "events.jsonl"), "");
}

TEST(EventLogTest, InteriorNewlinesAreEscaped) {
  auto log = EventLog::InMemory();
  json r = Record(1);
  r["payload"]["text"] = "line one\nline two";
  log->Append(r);
  auto records = log->Scan(0);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].text.find('\n'), std::string::npos);
  EXPECT_EQ(records[0].json, r);
}

TEST(EventLogTest, BatchedModeFlushesWithinWindow) {
  TempDir dir;
  auto log = EventLog::OpenFile(dir / "events.jsonl",
                                {SyncPolicy::kBatched, std::chrono::milliseconds(2)});
  for (int i = 1; i <= 100; ++i) log->Append(Record(i));
  // Scan sees everything, flushed or not.
  EXPECT_EQ(log->Scan(0).size(), 100u);
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  std::string text = ReadFile(dir / "events.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 100);
}

TEST(EventLogTest, FsyncModeWorks) {
  TempDir dir;
  auto log = EventLog::OpenFile(dir / "events.jsonl", {SyncPolicy::kFsyncPerAppend});
  log->Append(Record(1));
  EXPECT_TRUE(log->Healthy());
  EXPECT_EQ(ReadFile(dir / "events.jsonl"), Record(1).dump() + "\n");
}

TEST(EventLogTest, InMemoryBehavesLikeFile) {
  auto log = EventLog::InMemory();
  EXPECT_EQ(log->Append(Record(1)), 0u);
  EXPECT_EQ(log->Append(Record(2)), 1u);
  EXPECT_EQ(log->Scan(0).size(), 2u);
  EXPECT_TRUE(log->in_memory());
}

TEST(SnapshotStoreTest, LatestWins) {
  TempDir dir;
  SnapshotStore store(dir / "snaps");
  EXPECT_FALSE(store.LoadLatest().has_value());
  store.Write(10, {{"x", 1}});
  store.Write(200, {{"x", 2}});
  store.Write(30, {{"x", 3}});
  auto latest = store.LoadLatest();
  ASSERT_TRUE(latest.has_value());
  EXPECT_EQ(latest->log_position, 200u);
  EXPECT_EQ(latest->document["x"], 2);
}

}  // namespace
}  // namespace arena
