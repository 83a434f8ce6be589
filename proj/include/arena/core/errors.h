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

#ifndef ARENA_CORE_ERRORS_H_
#define ARENA_CORE_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace arena {

// Machine-readable failure categories. The HTTP layer maps each one to a
// status code and exposes ErrorCodeName() as the "code" field.
enum class ErrorCode {
  kValidation,
  kNotFound,
  kConflict,
  kArenaNotReady,
  kBackpressure,
  kIngest,
  kCorruption,
  kProvider,
  kUnauthorized,
};

std::string_view ErrorCodeName(ErrorCode code);

class ArenaError : public std::runtime_error {
 public:
  ArenaError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arena

#endif  // ARENA_CORE_ERRORS_H_
