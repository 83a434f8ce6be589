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

#include "arena/core/errors.h"

namespace arena {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
      return "validation_error";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kConflict:
      return "conflict";
    case ErrorCode::kArenaNotReady:
      return "arena_not_ready";
    case ErrorCode::kBackpressure:
      return "backpressure";
    case ErrorCode::kIngest:
      return "ingest_error";
    case ErrorCode::kCorruption:
      return "corruption";
    case ErrorCode::kProvider:
      return "provider_error";
    case ErrorCode::kUnauthorized:
      return "unauthorized";
  }
  return "unknown";
}

}  // namespace arena
