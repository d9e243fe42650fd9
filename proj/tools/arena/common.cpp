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

#include <iostream>

#include "arena/error.hpp"
#include "arena/util.hpp"
#include "cli.hpp"

namespace arena::cli {

void Info(const Globals& globals, const std::string& message) {
  if (globals.verbosity > 0) std::cerr << "arena: " << message << "\n";
}

Json LoadConfig(const Globals& globals) {
  if (globals.config_path.empty()) return Json::object();
  std::string text;
  try {
    text = ReadFile(globals.config_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFileError, e.what());
  }
  try {
    Json doc = Json::parse(text);
    if (!doc.is_object()) {
      throw Error(ErrorCode::kFileError, globals.config_path + ": config must be an object");
    }
    return doc;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFileError, globals.config_path + ": " + e.what());
  }
}

Json ConfigSection(const Globals& globals, const std::string& name) {
  const Json config = LoadConfig(globals);
  auto it = config.find(name);
  if (it == config.end()) return Json::object();
  if (!it->is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "config section \"" + name + "\" must be an object");
  }
  return *it;
}

void Emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
    return;
  }
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  WriteFileAtomic(target, content);
}

std::vector<Json> ReadJsonl(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFileError, e.what());
  }
  std::vector<Json> rows;
  std::size_t line_number = 0;
  for (const std::string& line : SplitLines(text)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kFileError,
                  path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return rows;
}

namespace {

ServiceConfig ReadOnlyConfig(const std::string& data_dir, const Globals& globals,
                             const ranking::LeaderboardOptions& leaderboard) {
  ServiceConfig config =
      globals.config_path.empty() ? ServiceConfig{} : ServiceConfigFromJson(LoadConfig(globals));
  config.data_dir = data_dir;
  config.durable = false;
  config.finalize_interrupted = false;
  config.allow_include_models = true;
  if (globals.seed_given) config.seed = globals.seed;
  config.leaderboard = leaderboard;
  config.leaderboard.seed = config.seed;
  return config;
}

}  // namespace

DataView::DataView(const std::string& data_dir, const Globals& globals,
                   const ranking::LeaderboardOptions& leaderboard)
    : store_((std::filesystem::is_directory(data_dir)
                  ? data_dir
                  : throw Error(ErrorCode::kFileError,
                                "data directory \"" + data_dir + "\" does not exist")),
             /*durable=*/false) {
  service_ = std::make_unique<ArenaService>(ReadOnlyConfig(data_dir, globals, leaderboard),
                                            store_);
}

}  // namespace arena::cli
