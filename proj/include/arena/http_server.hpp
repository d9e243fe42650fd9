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

#ifndef ARENA_HTTP_SERVER_HPP_
#define ARENA_HTTP_SERVER_HPP_

#include <memory>
#include <string>

#include "arena/error.hpp"
#include "arena/service.hpp"

namespace arena {

// HTTP status used for an error code in API responses.
int HttpStatusFor(ErrorCode code);

// JSON HTTP API over an ArenaService:
//
//   POST /tasks                      {"prompt", "submitter"} or {"tasks": [...]}
//   GET  /battles/{id}               ?voter=&include_models=true
//   POST /battles/{id}/vote          {"choice": "Left"|"Right"|"Tie", "voter"}
//   POST /battles/{id}/annotations   {"annotator", "annotations": [...]}
//   GET  /battles/{id}/annotations
//   GET  /annotations                JSONL export for the failure miner
//   GET  /leaderboard                ?format=csv
//   GET  /artifacts/{sha256}
//   GET  /healthz
//
// Errors are {"error": {"code": "DuplicateVote", "message": "..."}}.
class ArenaHttpServer {
 public:
  explicit ArenaHttpServer(ArenaService& service,
                           std::string static_dir = std::string());
  ~ArenaHttpServer();

  // Binds to host:port (port 0 picks a free one) and returns the port.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); call after Bind.
  void Serve();
  void Stop();
  void WaitUntilReady();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arena

#endif  // ARENA_HTTP_SERVER_HPP_
