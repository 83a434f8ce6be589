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

#include "arena/core/random.h"

#include <cstdio>

namespace arena {

std::uint64_t SplitMix64::NextBelow(std::uint64_t bound) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = -bound % bound;
  for (;;) {
    std::uint64_t r = Next();
    if (r >= limit) return r % bound;
  }
}

std::string HexId(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace arena
