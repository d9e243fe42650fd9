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

#include "arena/http_server.hpp"

#include "arena/util.hpp"
// httplib pulls in <resolv.h>, whose `_res` macro collides with Eigen's
// parameter names; it must come after every header that includes Eigen.
#include <httplib.h>

namespace arena {
namespace {

void SendJson(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  SendJson(res,
           {{"error", {{"code", ErrorCodeName(code)}, {"message", message}}}},
           HttpStatusFor(code));
}

Json ParseBody(const httplib::Request& req) {
  try {
    Json body = Json::parse(req.body);
    if (!body.is_object()) {
      throw Error(ErrorCode::kValidationError, "request body must be an object");
    }
    return body;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidationError,
                std::string("request body is not JSON: ") + e.what());
  }
}

std::string StringField(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::kValidationError, std::string(key) + " must be a string");
  }
  return it->get<std::string>();
}

// Wraps a handler so module errors become structured responses.
template <typename Fn>
httplib::Server::Handler Guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      std::string message = e.what();
      const std::string prefix = std::string(ErrorCodeName(e.code())) + ": ";
      if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
      SendError(res, e.code(), message);
    } catch (const Json::exception& e) {
      SendError(res, ErrorCode::kValidationError, e.what());
    }
  };
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kDuplicateVote:
    case ErrorCode::kBattleNotReady:
    case ErrorCode::kNoVotes:
      return 409;
    case ErrorCode::kRosterTooSmall:
    case ErrorCode::kStorageError:
      return 503;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kValidationError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kInvalidChoice:
    case ErrorCode::kIndexOutOfRange:
    case ErrorCode::kMissingReason:
    case ErrorCode::kUnknownAction:
    case ErrorCode::kOrderError:
      return 400;
    default:
      return 500;
  }
}

struct ArenaHttpServer::Impl {
  ArenaService& service;
  httplib::Server server;
  explicit Impl(ArenaService& s) : service(s) {}
};

ArenaHttpServer::ArenaHttpServer(ArenaService& service, std::string static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  httplib::Server& server = impl_->server;
  ArenaService& svc = service;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    SendJson(res, {{"ok", true}});
  });

  server.Post("/tasks", Guarded([&svc](const httplib::Request& req,
                                       httplib::Response& res) {
    const Json body = ParseBody(req);
    const std::string submitter = StringField(body, "submitter");
    if (auto it = body.find("tasks"); it != body.end()) {
      if (!it->is_array()) {
        throw Error(ErrorCode::kValidationError, "tasks must be an array");
      }
      std::vector<TaskRecord> tasks;
      for (const Json& item : *it) tasks.push_back(item.get<TaskRecord>());
      SendJson(res, {{"battle_ids", svc.SubmitTasks(tasks, submitter)}}, 202);
      return;
    }
    const std::string id = svc.SubmitTask(StringField(body, "prompt"), submitter);
    SendJson(res, {{"battle_id", id}}, 202);
  }));

  server.Get(R"(/battles/([A-Za-z0-9_-]+))",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string voter =
                   req.has_param("voter") ? req.get_param_value("voter") : "";
               const bool include = req.has_param("include_models") &&
                                    req.get_param_value("include_models") == "true";
               SendJson(res, svc.GetBattle(req.matches[1], voter, include));
             }));

  server.Post(R"(/battles/([A-Za-z0-9_-]+)/vote)",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const Json body = ParseBody(req);
                SendJson(res, svc.CastVote(req.matches[1], StringField(body, "choice"),
                                           StringField(body, "voter")));
              }));

  server.Post(R"(/battles/([A-Za-z0-9_-]+)/annotations)",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const Json body = ParseBody(req);
                const std::string id = req.matches[1];
                const Json items = body.value("annotations", Json::array());
                if (!items.is_array()) {
                  throw Error(ErrorCode::kValidationError,
                              "annotations must be an array");
                }
                std::vector<StepAnnotation> annotations;
                for (const Json& item : items) {
                  annotations.push_back(item.get<StepAnnotation>());
                }
                SendJson(res, svc.SubmitAnnotations(id, annotations,
                                                    StringField(body, "annotator")));
              }));

  server.Get(R"(/battles/([A-Za-z0-9_-]+)/annotations)",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               SendJson(res, svc.GetAnnotations(req.matches[1]));
             }));

  server.Get("/annotations", Guarded([&svc](const httplib::Request&,
                                            httplib::Response& res) {
    std::string body;
    for (const Json& row : svc.ExportAnnotations()) body += row.dump() + "\n";
    res.set_content(body, "application/x-ndjson");
  }));

  server.Get("/leaderboard", Guarded([&svc](const httplib::Request& req,
                                            httplib::Response& res) {
    if (req.has_param("format") && req.get_param_value("format") == "csv") {
      res.set_content(svc.LeaderboardCsv(), "text/csv");
    } else {
      res.set_content(svc.LeaderboardJson(), "application/json");
    }
  }));

  server.Get(R"(/artifacts/([0-9a-f]+))",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               std::optional<std::string> bytes = svc.GetArtifact(req.matches[1]);
               if (!bytes) {
                 throw Error(ErrorCode::kNotFound, "no artifact " + req.matches[1].str());
               }
               res.set_header("Cache-Control", "public, max-age=31536000, immutable");
               res.set_content(std::move(*bytes), "application/octet-stream");
             }));

  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

ArenaHttpServer::~ArenaHttpServer() { Stop(); }

int ArenaHttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kInvalidArgument, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ArenaHttpServer::Serve() { impl_->server.listen_after_bind(); }

void ArenaHttpServer::Stop() {
  if (impl_) impl_->server.stop();
}

void ArenaHttpServer::WaitUntilReady() { impl_->server.wait_until_ready(); }

}  // namespace arena
