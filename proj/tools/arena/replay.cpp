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

#include <chrono>
#include <iostream>
#include <random>

#include "arena/error.hpp"
#include "arena/runner.hpp"
#include "arena/util.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct ReplayOptions {
  std::string fixture_path;
  std::string data_dir;
  std::string vote;
  double timeout_s = 60.0;
};

// A battle fixture: {"task": "...", "traces": [trace, trace]}, each trace in
// the arena.trace/v1 schema with a distinct "model".
struct Fixture {
  std::string task;
  std::map<std::string, AgentTrace> traces;  // by model name
};

Fixture LoadFixture(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFileError, path + ": " + e.what());
  }
  Fixture fixture;
  if (!doc.is_object() || !doc.contains("task") || !doc["task"].is_string() ||
      !doc.contains("traces") || !doc["traces"].is_array() || doc["traces"].size() != 2) {
    throw Error(ErrorCode::kSchemaError,
                path + ": expected {\"task\": string, \"traces\": [trace, trace]}");
  }
  fixture.task = doc["task"].get<std::string>();
  for (const Json& trace_doc : doc["traces"]) {
    AgentTrace trace = TraceFromJson(trace_doc);
    const std::string model = trace.model.name;
    if (!fixture.traces.emplace(model, std::move(trace)).second) {
      throw Error(ErrorCode::kSchemaError, path + ": both traces belong to \"" + model + "\"");
    }
  }
  return fixture;
}

// Removes a scratch directory on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    std::random_device device;
    path_ = std::filesystem::temp_directory_path() /
            ("arena-replay-" + std::to_string(device()) + std::to_string(device()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

int RunReplay(const ReplayOptions& options, const Globals& globals) {
  const Fixture fixture = LoadFixture(options.fixture_path);
  std::optional<ScratchDir> scratch;
  std::string data_dir = options.data_dir;
  if (data_dir.empty()) {
    scratch.emplace();
    data_dir = scratch->path().string();
  }
  std::filesystem::create_directories(data_dir);

  ServiceConfig config;
  for (const auto& [model, trace] : fixture.traces) config.roster.push_back({ModelId(model), {}});
  config.data_dir = data_dir;
  config.seed = globals.seed;
  config.leaderboard.seed = globals.seed;
  config.allow_include_models = true;
  const auto factory = [&fixture](const RosterEntry& entry) {
    return std::make_unique<runner::ReplayRunner>(fixture.traces.at(entry.model.name));
  };

  BattleStore store(data_dir, /*durable=*/true);
  ArenaService service(config, store, factory);
  const std::string battle_id = service.SubmitTask(fixture.task, "replay");
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(options.timeout_s * 1000));
  if (!service.WaitUntilSettled(battle_id, timeout)) {
    throw Error(ErrorCode::kTimeout, "battle " + battle_id + " did not settle");
  }
  const Json battle = service.GetBattle(battle_id, "", /*include_models=*/true);

  bool identical = true;
  Json sides = Json::object();
  for (const char* side : {"left", "right"}) {
    const std::string model = battle["models"][side].get<std::string>();
    const AgentTrace& expected = fixture.traces.at(model);
    const AgentTrace actual = TraceFromJson(battle[side]["trace"]);
    const bool same = TraceToJson(actual)["steps"] == TraceToJson(expected)["steps"] &&
                      actual.final_success == expected.final_success;
    identical = identical && same;
    sides[side] = {{"model", model},
                   {"exit", battle[side]["exit"]},
                   {"steps", actual.steps.size()},
                   {"identical", same}};
  }
  Json result = {{"battle_id", battle_id},
                 {"status", battle["status"]},
                 {"sides", sides},
                 {"identical", identical}};
  if (!options.vote.empty()) {
    result["vote"] = service.CastVote(battle_id, options.vote, "replay");
    result["leaderboard"] = Json::parse(service.LeaderboardJson());
  }
  std::cout << result.dump(2) << "\n";
  return identical ? 0 : 1;
}

}  // namespace

Command AddReplay(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<ReplayOptions>();
  CLI::App* sub =
      app.add_subcommand("replay", "Run a recorded battle through the arena and check it");
  sub->add_option("--fixture", options->fixture_path,
                  "Battle fixture: {\"task\", \"traces\": [trace, trace]}")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--data-dir", options->data_dir, "Keep the battle here (default: scratch)");
  sub->add_option("--vote", options->vote, "Also cast this vote: Left, Right or Tie");
  sub->add_option("--timeout", options->timeout_s, "Seconds to wait for the battle")
      ->capture_default_str();
  return {sub, [options, &globals] { return RunReplay(*options, globals); }};
}

}  // namespace arena::cli
