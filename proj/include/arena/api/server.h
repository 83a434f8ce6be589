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

#ifndef ARENA_API_SERVER_H_
#define ARENA_API_SERVER_H_

#include <memory>
#include <string>

#include "arena/api/service.h"

namespace httplib {
class Server;
}

namespace arena {

// HTTP front end for ArenaService. Every route answers with JSON and a
// permissive CORS header.
class ApiServer {
 public:
  explicit ApiServer(ArenaService& service);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds "host:port"; port 0 picks a free one. Returns the bound port.
  // Throws ArenaError(kValidation) when the address cannot be bound.
  int Bind(const std::string& listen_address);
  // Serves until Stop(). Call after Bind.
  void Serve();
  void Stop();
  // Blocks until Serve() is accepting connections.
  void WaitUntilReady();

 private:
  ArenaService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace arena

#endif  // ARENA_API_SERVER_H_
