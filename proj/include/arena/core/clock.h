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

#ifndef ARENA_CORE_CLOCK_H_
#define ARENA_CORE_CLOCK_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace arena {

// Wall-clock instants are kept at millisecond resolution, which is also the
// resolution of the RFC 3339 strings written to the event log.
using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp Now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp Now() const override;
};

// Settable clock for tests and simulation. Thread-safe.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{});

  Timestamp Now() const override;
  void Set(Timestamp t);
  void Advance(Millis delta);

 private:
  std::atomic<std::int64_t> millis_;
};

// "2026-10-16T08:30:00.125Z". Always UTC with three fractional digits.
std::string FormatRfc3339(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fraction](Z|+HH:MM|-HH:MM)". Fractions
// beyond milliseconds are truncated.
std::optional<Timestamp> ParseRfc3339(std::string_view text);

}  // namespace arena

#endif  // ARENA_CORE_CLOCK_H_
