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

#include "arena/api/server.h"

#include <algorithm>
#include <cctype>

#include "arena/core/errors.h"
#include "httplib.h"

namespace arena {
namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void Cors(httplib::Response& res) {
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
  res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
}

}  // namespace

ApiServer::ApiServer(ArenaService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    request.body = req.body;
    for (const auto& [name, value] : req.headers) request.headers[Lower(name)] = value;
    for (const auto& [name, value] : req.params) request.query[name] = value;
    ApiResponse response = service_.Handle(request);
    res.status = response.status;
    res.set_content(response.body.dump(), "application/json");
    Cors(res);
  };
  server_->Get(".*", forward);
  server_->Post(".*", forward);
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    Cors(res);
  });
}

ApiServer::~ApiServer() { Stop(); }

int ApiServer::Bind(const std::string& listen_address) {
  const auto colon = listen_address.rfind(':');
  if (colon == std::string::npos) {
    throw ArenaError(ErrorCode::kValidation, "listen address must be host:port");
  }
  const std::string host = listen_address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen_address.substr(colon + 1));
  } catch (const std::exception&) {
    throw ArenaError(ErrorCode::kValidation, "bad port in " + listen_address);
  }
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw ArenaError(ErrorCode::kValidation, "cannot bind " + listen_address);
  }
  return bound;
}

void ApiServer::Serve() { server_->listen_after_bind(); }

void ApiServer::Stop() {
  if (server_->is_running()) server_->stop();
}

void ApiServer::WaitUntilReady() { server_->wait_until_ready(); }

}  // namespace arena
