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

#ifndef ARENA_TOOLS_ARENA_CLI_HPP_
#define ARENA_TOOLS_ARENA_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arena/domain.hpp"
#include "arena/service.hpp"
#include "arena/store.hpp"

namespace arena::cli {

// Options shared by every subcommand.
struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int verbosity = 0;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

Command AddServe(CLI::App& app, const Globals& globals);
Command AddRank(CLI::App& app, const Globals& globals);
Command AddJudge(CLI::App& app, const Globals& globals);
Command AddMine(CLI::App& app, const Globals& globals);
Command AddGenTasks(CLI::App& app, const Globals& globals);
Command AddAgree(CLI::App& app, const Globals& globals);
Command AddReplay(CLI::App& app, const Globals& globals);

// ---------------------------------------------------------------------------
// Helpers.

// Progress message on stderr when -v was given.
void Info(const Globals& globals, const std::string& message);

// The --config document, or an empty object without one. FileError when the
// file cannot be read or parsed.
Json LoadConfig(const Globals& globals);

// Section `name` of the config, or an empty object.
Json ConfigSection(const Globals& globals, const std::string& name);

// Writes to `path`, or to stdout when the path is empty or "-".
void Emit(const std::string& path, const std::string& content);

// One JSON value per non-blank line. FileError on unreadable input.
std::vector<Json> ReadJsonl(const std::filesystem::path& path);

// Read access to a data directory: the logs replayed into a service that
// never starts runs or finalizes anything, with operator access to model
// names.
class DataView {
 public:
  DataView(const std::string& data_dir, const Globals& globals,
           const ranking::LeaderboardOptions& leaderboard = {});
  ArenaService& service() { return *service_; }
  BattleStore& store() { return store_; }

 private:
  BattleStore store_;
  std::unique_ptr<ArenaService> service_;
};

}  // namespace arena::cli

#endif  // ARENA_TOOLS_ARENA_CLI_HPP_
