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

#include "arena/provider/provider.h"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include "arena/core/errors.h"
#include "httplib.h"

namespace arena {
namespace {

using nlohmann::json;
using Ms = std::chrono::milliseconds;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl ParseHttpUrl(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0 || url.size() == kScheme.size()) {
    throw ArenaError(ErrorCode::kValidation,
                     "provider url must start with http://: " + url);
  }
  const auto slash = url.find('/', kScheme.size());
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

ProviderDescriptor ProviderDescriptor::Fixture(std::string path) {
  ProviderDescriptor d;
  d.kind = ProviderKind::kFixture;
  d.fixture_path = std::move(path);
  return d;
}

ProviderDescriptor ProviderDescriptor::Http(std::string url, Ms timeout,
                                            int max_retries) {
  ProviderDescriptor d;
  d.kind = ProviderKind::kHttpEndpoint;
  d.url = std::move(url);
  d.timeout = timeout;
  d.max_retries = max_retries;
  return d;
}

void ProviderDescriptor::Validate() const {
  if (kind == ProviderKind::kHttpEndpoint) {
    ParseHttpUrl(url);
    if (timeout.count() <= 0) {
      throw ArenaError(ErrorCode::kValidation, "provider timeout must be > 0");
    }
    if (max_retries < 0) {
      throw ArenaError(ErrorCode::kValidation, "max_retries must be >= 0");
    }
  }
}

json ProviderDescriptor::ToJson() const {
  if (kind == ProviderKind::kFixture) {
    return {{"kind", "fixture"}, {"path", fixture_path}};
  }
  return {{"kind", "http_endpoint"},
          {"url", url},
          {"timeout_ms", timeout.count()},
          {"max_retries", max_retries}};
}

ProviderDescriptor ProviderDescriptor::FromJson(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    ProviderDescriptor d;
    if (kind == "fixture") {
      d = Fixture(j.value("path", std::string()));
    } else if (kind == "http_endpoint") {
      d = Http(j.at("url").get<std::string>(),
               Ms(j.value("timeout_ms", std::int64_t{120000})),
               j.value("max_retries", 1));
      d.bearer_token = j.value("bearer_token", std::string());
    } else {
      throw ArenaError(ErrorCode::kValidation, "unknown provider kind " + kind);
    }
    d.Validate();
    return d;
  } catch (const json::exception& e) {
    throw ArenaError(ErrorCode::kValidation,
                     std::string("bad provider descriptor: ") + e.what());
  }
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string FixtureKey(Track track, std::string_view prompt) {
  return std::string(TrackId(track)) + ":" + Sha256Hex(prompt);
}

FixtureCorpus::FixtureCorpus(json document) {
  if (!document.is_object()) {
    throw ArenaError(ErrorCode::kValidation, "fixture corpus must be an object");
  }
  for (auto& [key, responses] : document.items()) {
    if (!responses.is_object()) {
      throw ArenaError(ErrorCode::kValidation,
                       "fixture entry " + key + " must map model ids to text");
    }
    auto& slot = entries_[key];
    for (auto& [model, text] : responses.items()) {
      if (!text.is_string()) {
        throw ArenaError(ErrorCode::kValidation,
                         "fixture response for " + model + " must be a string");
      }
      slot[model] = text.get<std::string>();
    }
  }
}

FixtureCorpus FixtureCorpus::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArenaError(ErrorCode::kValidation, "cannot read fixture " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return FixtureCorpus(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    throw ArenaError(ErrorCode::kValidation,
                     "fixture " + path + " is not JSON: " + e.what());
  }
}

void FixtureCorpus::Add(Track track, std::string_view prompt,
                        const std::string& model_id, std::string response) {
  entries_[FixtureKey(track, prompt)][model_id] = std::move(response);
}

std::string FixtureCorpus::Lookup(Track track, std::string_view prompt,
                                  const std::string& model_id) const {
  const std::string prompt_hash = Sha256Hex(prompt);
  const std::string key = std::string(TrackId(track)) + ":" + prompt_hash;
  if (auto it = entries_.find(key); it != entries_.end()) {
    if (auto r = it->second.find(model_id); r != it->second.end()) {
      return r->second;
    }
  }
  return Placeholder(model_id, prompt_hash);
}

std::string FixtureCorpus::Placeholder(const std::string& model_id,
                                       std::string_view prompt_hash) {
  const std::string tag =
      Sha256Hex(model_id + ":" + std::string(prompt_hash)).substr(0, 16);
  return "Placeholder response " + tag + " for prompt " +
         std::string(prompt_hash.substr(0, 12)) + ".";
}

std::string CapResponse(std::string text, std::size_t cap) {
  if (text.size() <= cap) return text;
  std::size_t cut = cap;
  // Step back over UTF-8 continuation bytes.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
    --cut;
  }
  text.resize(cut);
  text.append(kTruncationMarker);
  return text;
}

ProviderGateway::ProviderGateway(std::size_t response_cap)
    : response_cap_(response_cap) {}

void ProviderGateway::InstallCorpus(const std::string& path_key,
                                    FixtureCorpus corpus) {
  std::lock_guard<std::mutex> lock(mu_);
  corpora_[path_key] = std::make_shared<const FixtureCorpus>(std::move(corpus));
}

std::shared_ptr<const FixtureCorpus> ProviderGateway::CorpusFor(
    const std::string& path) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = corpora_.find(path);
  if (it != corpora_.end()) return it->second;
  auto corpus = path.empty() ? std::make_shared<const FixtureCorpus>()
                             : std::make_shared<const FixtureCorpus>(
                                   FixtureCorpus::Load(path));
  corpora_.emplace(path, corpus);
  return corpus;
}

std::string ProviderGateway::FetchHttp(const ProviderDescriptor& descriptor,
                                       Track track, const std::string& prompt,
                                       Ms budget) const {
  const ParsedUrl url = ParseHttpUrl(descriptor.url);
  const json body = {{"track", TrackId(track)}, {"prompt", prompt}};
  const std::string payload = body.dump();
  const auto deadline = std::chrono::steady_clock::now() + budget;

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= descriptor.max_retries; ++attempt) {
    const auto remaining = std::chrono::duration_cast<Ms>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      last_error = "deadline exceeded";
      break;
    }
    const Ms attempt_timeout = std::min(descriptor.timeout, remaining);
    httplib::Client client(url.origin);
    client.set_connection_timeout(attempt_timeout);
    client.set_read_timeout(attempt_timeout);
    client.set_write_timeout(attempt_timeout);
    if (!descriptor.bearer_token.empty()) {
      client.set_bearer_token_auth(descriptor.bearer_token);
    }
    auto res = client.Post(url.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("response").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw ArenaError(ErrorCode::kProvider,
                   "provider " + descriptor.url + " failed: " + last_error);
}

std::string ProviderGateway::FetchResponse(const ProviderDescriptor& descriptor,
                                           const std::string& model_id,
                                           Track track,
                                           const std::string& prompt,
                                           Ms budget) const {
  std::string text;
  if (descriptor.kind == ProviderKind::kFixture) {
    text = CorpusFor(descriptor.fixture_path)->Lookup(track, prompt, model_id);
  } else {
    text = FetchHttp(descriptor, track, prompt, budget);
  }
  return CapResponse(std::move(text), response_cap_);
}

std::pair<std::string, std::string> ProviderGateway::FetchPair(
    const CandidateRequest& left, const CandidateRequest& right, Track track,
    const std::string& prompt) const {
  const Ms budget = std::max(left.descriptor.timeout, right.descriptor.timeout);
  auto fetch = [&](const CandidateRequest& c) {
    return FetchResponse(c.descriptor, c.model_id, track, prompt, budget);
  };
  if (left.descriptor.kind == ProviderKind::kFixture &&
      right.descriptor.kind == ProviderKind::kFixture) {
    return {fetch(left), fetch(right)};
  }
  auto left_future = std::async(std::launch::async, [&] { return fetch(left); });
  std::string right_text;
  std::string error;
  try {
    right_text = fetch(right);
  } catch (const ArenaError& e) {
    error = e.what();
  }
  std::string left_text;
  try {
    left_text = left_future.get();
  } catch (const ArenaError& e) {
    error = error.empty() ? e.what() : error + "; " + e.what();
  }
  if (!error.empty()) throw ArenaError(ErrorCode::kProvider, error);
  return {std::move(left_text), std::move(right_text)};
}

}  // namespace arena
