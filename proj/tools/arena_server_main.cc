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

// arena-server: the HTTP arena service.
//
//   arena-server --config arena.json --listen 0.0.0.0:8080 --log-path events.jsonl
//
// Precedence: built-in defaults, then the config file, then ARENA_*
// environment variables, then flags.

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "arena/api/server.h"
#include "arena/api/service.h"
#include "arena/core/errors.h"

int main(int argc, char** argv) {
  CLI::App app{"Blind pairwise evaluation arena server"};
  std::string config_path, listen, log_path;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--listen", listen, "host:port to bind");
  app.add_option("--log-path", log_path, "event log file (JSON Lines)");
  CLI11_PARSE(app, argc, argv);

  // Signals are taken by a dedicated thread so that shutdown runs normally.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    arena::ApiConfig config =
        config_path.empty() ? arena::ApiConfig{} : arena::ApiConfig::Load(config_path);
    config.ApplyEnvironment();
    if (!listen.empty()) config.listen_address = listen;
    if (!log_path.empty()) config.log_path = log_path;
    config.Validate();

    arena::ArenaService service(config);
    arena::ApiServer server(service);
    const int port = server.Bind(config.listen_address);
    std::cerr << "[arena] listening on port " << port << ", "
              << service.pipeline().log().size() << " events recovered\n";

    std::atomic<bool> signalled{false};
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      signalled = true;
      std::cerr << "[arena] shutting down\n";
      server.Stop();
    });
    server.Serve();
    // Serve() can also return on its own; release the waiter either way.
    if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  } catch (const arena::ArenaError& e) {
    std::cerr << "arena-server: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
