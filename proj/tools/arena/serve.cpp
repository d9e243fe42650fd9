// Copyright 2026 The Agent Arena Authors.
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

#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "arena/error.hpp"
#include "arena/taskgen.hpp"
#include "arena/util.hpp"
#include "arena/http_server.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string data_dir;
  std::string tasks_path;
};

int RunServe(const ServeOptions& options, const Globals& globals) {
  if (globals.config_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "serve requires --config");
  }
  ServiceConfig config = ServiceConfigFromJson(LoadConfig(globals));
  if (!options.data_dir.empty()) config.data_dir = options.data_dir;
  if (globals.seed_given) {
    config.seed = globals.seed;
    config.leaderboard.seed = globals.seed;
  }

  // Signals are taken synchronously by a watcher thread so shutdown runs
  // outside a signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::filesystem::create_directories(config.data_dir);
  BattleStore store(config.data_dir, config.durable);
  ArenaService service(config, store);
  if (!options.tasks_path.empty()) {
    const auto ids =
        service.SubmitTasks(taskgen::TasksFromJsonl(ReadFile(options.tasks_path)), "cli");
    Info(globals, "queued " + std::to_string(ids.size()) + " battles from " + options.tasks_path);
  }

  ArenaHttpServer server(service, options.static_dir);
  const int port = server.Bind(options.host, options.port);
  std::cout << "arena: listening on http://" << options.host << ":" << port << std::endl;

  std::thread watcher([&] {
    int received = 0;
    sigwait(&signals, &received);
    server.Stop();
  });
  server.Serve();
  // Serve can also return on its own (bind loss); wake the watcher.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  Info(globals, "waiting for running battles");
  service.WaitIdle();
  return 0;
}

}  // namespace

Command AddServe(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<ServeOptions>();
  CLI::App* sub = app.add_subcommand("serve", "Run the arena HTTP service");
  sub->add_option("--host", options->host, "Listen address")->capture_default_str();
  sub->add_option("--port", options->port, "Listen port (0 picks a free port)")
      ->capture_default_str();
  sub->add_option("--static", options->static_dir, "Directory of web UI files to serve at /");
  sub->add_option("--data-dir", options->data_dir, "Overrides data_dir from the config");
  sub->add_option("--tasks", options->tasks_path, "Task JSONL to queue at startup");
  return {sub, [options, &globals] { return RunServe(*options, globals); }};
}

}  // namespace arena::cli
