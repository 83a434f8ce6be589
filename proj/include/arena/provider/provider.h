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

#ifndef ARENA_PROVIDER_PROVIDER_H_
#define ARENA_PROVIDER_PROVIDER_H_

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "arena/core/track.h"
#include "json.hpp"

namespace arena {

enum class ProviderKind { kHttpEndpoint, kFixture };

struct ProviderDescriptor {
  ProviderKind kind = ProviderKind::kFixture;
  // http_endpoint
  std::string url;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  int max_retries = 1;
  std::string bearer_token;
  // fixture: corpus file, or empty for placeholder-only responses.
  std::string fixture_path;

  static ProviderDescriptor Fixture(std::string path = {});
  static ProviderDescriptor Http(std::string url,
                                 std::chrono::milliseconds timeout = std::chrono::seconds(120),
                                 int max_retries = 1);

  // Throws ArenaError(kValidation).
  void Validate() const;

  // {"kind": "fixture", "path": ...} or
  // {"kind": "http_endpoint", "url": ..., "timeout_ms": ..., "max_retries": ...}.
  // The bearer token is never serialized.
  nlohmann::json ToJson() const;
  static ProviderDescriptor FromJson(const nlohmann::json& j);
};

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

// "track:sha256(prompt)", the fixture corpus key.
std::string FixtureKey(Track track, std::string_view prompt);

// Canned responses: key -> {model_id -> response}.
class FixtureCorpus {
 public:
  FixtureCorpus() = default;
  explicit FixtureCorpus(nlohmann::json document);

  // Throws ArenaError(kValidation) when the file is missing or malformed.
  static FixtureCorpus Load(const std::string& path);

  void Add(Track track, std::string_view prompt, const std::string& model_id,
           std::string response);

  // Corpus text when present, otherwise a placeholder that depends only on
  // the model id and the prompt hash. The placeholder never contains the
  // model id, so it is safe to show to a voter.
  std::string Lookup(Track track, std::string_view prompt,
                     const std::string& model_id) const;

  static std::string Placeholder(const std::string& model_id,
                                 std::string_view prompt_hash);

 private:
  std::map<std::string, std::map<std::string, std::string>> entries_;
};

// Cuts text to at most `cap` bytes on a UTF-8 boundary and appends
// kTruncationMarker when anything was removed.
inline constexpr std::string_view kTruncationMarker = "\n[response truncated]";
std::string CapResponse(std::string text, std::size_t cap);

struct CandidateRequest {
  std::string model_id;
  ProviderDescriptor descriptor;
};

// Fetches candidate responses. Fixture corpora are loaded once per path and
// cached; in-memory corpora can be installed under any path key.
class ProviderGateway {
 public:
  static constexpr std::size_t kDefaultResponseCap = 256 * 1024;

  explicit ProviderGateway(std::size_t response_cap = kDefaultResponseCap);

  void InstallCorpus(const std::string& path_key, FixtureCorpus corpus);

  // One response. HTTP endpoints get POST {"track", "prompt"} and must answer
  // 200 {"response": str}; failures are retried max_retries times within
  // `budget`. Throws ArenaError(kProvider) when every attempt fails.
  std::string FetchResponse(const ProviderDescriptor& descriptor,
                            const std::string& model_id, Track track,
                            const std::string& prompt,
                            std::chrono::milliseconds budget) const;

  // Both candidates, concurrently, under one shared deadline: the larger of
  // the two descriptor timeouts. Throws ArenaError(kProvider) if either fails.
  std::pair<std::string, std::string> FetchPair(const CandidateRequest& left,
                                                const CandidateRequest& right,
                                                Track track,
                                                const std::string& prompt) const;

  std::size_t response_cap() const { return response_cap_; }

 private:
  std::shared_ptr<const FixtureCorpus> CorpusFor(const std::string& path) const;
  std::string FetchHttp(const ProviderDescriptor& descriptor, Track track,
                        const std::string& prompt,
                        std::chrono::milliseconds budget) const;

  std::size_t response_cap_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const FixtureCorpus>> corpora_;
};

}  // namespace arena

#endif  // ARENA_PROVIDER_PROVIDER_H_
