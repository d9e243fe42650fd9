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

#ifndef ARENA_SERVICE_HPP_
#define ARENA_SERVICE_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "arena/domain.hpp"
#include "arena/ranking.hpp"
#include "arena/runner.hpp"
#include "arena/store.hpp"

namespace arena {

// How a model's agent is reached.
struct RunnerSpec {
  enum class Kind { kMock, kSubprocess, kHttp };
  Kind kind = Kind::kMock;
  std::vector<std::string> command;  // kSubprocess
  std::string url;                   // kHttp
  runner::MockScript script;         // kMock
};

struct RosterEntry {
  ModelId model;
  RunnerSpec runner;
};

struct ServiceConfig {
  std::vector<RosterEntry> roster;
  int max_steps = 25;
  double step_timeout_s = 60.0;
  double run_timeout_s = 15.0 * 60.0;
  std::uint64_t seed = 0;
  ranking::LeaderboardOptions leaderboard;
  // Whether get_battle may honour include_models for callers that have not
  // voted (operator access).
  bool allow_include_models = false;
  // Finalize battles left running by a crash with runner_error results.
  bool finalize_interrupted = true;
  std::string data_dir = "arena-data";
  bool durable = true;

  std::vector<ModelId> models() const;
};

// Parses the service config file. Example:
//
//   {"data_dir": "data", "seed": 7, "max_steps": 25,
//    "step_timeout_s": 60, "run_timeout_s": 900,
//    "leaderboard": {"bootstrap_rounds": 100, "tie_policy": "half_win"},
//    "roster": [
//      {"model": "gpt-4o", "runner": {"type": "http", "url": "http://h:8900"}},
//      {"model": "local", "runner": {"type": "subprocess",
//                                    "command": ["./runner", "--model", "x"]}},
//      {"model": "mock-a", "runner": {"type": "mock", "steps": 3}}]}
ServiceConfig ServiceConfigFromJson(const Json& doc);
std::unique_ptr<runner::RunnerEndpoint> MakeEndpoint(const RunnerSpec& spec);

// Builds the endpoint a battle side runs against. Defaults to MakeEndpoint.
using EndpointFactory =
    std::function<std::unique_ptr<runner::RunnerEndpoint>(const RosterEntry&)>;

// One side's outcome as stored and served.
struct SideResult {
  runner::RunExit exit = runner::RunExit::kRunnerError;
  std::optional<std::string> error_detail;
  AgentTrace trace;
};

// Orchestrates battles: task intake, concurrent runs, blind votes, step
// annotations and the leaderboard. All state is rebuilt from the store on
// construction, so a restarted service answers exactly as before.
class ArenaService {
 public:
  ArenaService(ServiceConfig config, BattleStore& store,
               EndpointFactory factory = {});
  ~ArenaService();

  ArenaService(const ArenaService&) = delete;
  ArenaService& operator=(const ArenaService&) = delete;

  // Persists the task, samples a pair and starts both runs; returns the
  // battle id without waiting for them. Throws ValidationError,
  // RosterTooSmall, StorageError.
  std::string SubmitTask(const std::string& prompt, const std::string& submitter);
  // Batch intake of prepared task records (origin and source tag are kept;
  // ids are reassigned).
  std::vector<std::string> SubmitTasks(const std::vector<TaskRecord>& tasks,
                                       const std::string& submitter);

  // Returns the acknowledgement, which reveals both model names. Throws
  // NotFound, InvalidChoice, BattleNotReady, DuplicateVote, ValidationError.
  Json CastVote(const std::string& battle_id, const std::string& choice,
                const std::string& voter);

  // Validates every annotation, then stores the batch as one record. Throws
  // NotFound, BattleNotReady, IndexOutOfRange, MissingReason.
  Json SubmitAnnotations(const std::string& battle_id,
                         const std::vector<StepAnnotation>& annotations,
                         const std::string& annotator);
  Json GetAnnotations(const std::string& battle_id) const;

  // Battle view. Model names are present only when `voter` has voted on this
  // battle, or include_models is set and the config allows it.
  Json GetBattle(const std::string& battle_id, const std::string& voter = "",
                 bool include_models = false) const;

  // Snapshot over all stored votes; cached until the next vote. Throws
  // NoVotes.
  std::shared_ptr<const ranking::LeaderboardSnapshot> Leaderboard();
  std::string LeaderboardJson();
  std::string LeaderboardCsv();

  // One JSON object per annotated step, joined with the step it refers to;
  // this is the failure miner's input.
  std::vector<Json> ExportAnnotations() const;
  std::vector<ranking::VoteOutcome> VoteOutcomes() const;

  std::optional<std::string> GetArtifact(const std::string& hash) const;

  // Blocks until the battle leaves the running state or the timeout passes.
  bool WaitUntilSettled(const std::string& battle_id,
                        std::chrono::milliseconds timeout);
  void WaitIdle();

  // Canonical dump of all battles, votes and annotations, for replay checks.
  Json StateDigest() const;
  std::vector<std::string> BattleIds() const;

 private:
  struct BattleState {
    Battle battle;
    std::string submitter;
    std::optional<SideResult> left;
    std::optional<SideResult> right;
    std::vector<Vote> votes;
    std::set<std::string> voters;
    std::vector<Json> annotation_batches;
  };

  void Replay();
  void ApplyTask(const Json& record);
  void ApplyBattle(const Json& record);
  void ApplyTrace(const Json& record);
  void ApplyVote(const Json& record);
  void ApplyAnnotations(const Json& record);
  void FinalizeInterrupted();

  std::string StartBattle(TaskRecord task, const std::string& submitter);
  void RunSide(std::string battle_id, Side side, RosterEntry entry,
               runner::RunRequest request, std::stop_token stop);
  void RecordSide(const std::string& battle_id, Side side, SideResult result);
  const RosterEntry* FindEntry(const ModelId& model) const;
  BattleState& Find(const std::string& battle_id);
  const BattleState& Find(const std::string& battle_id) const;
  std::vector<ModelId> LeaderboardRoster() const;

  ServiceConfig config_;
  BattleStore& store_;
  EndpointFactory factory_;

  mutable std::mutex mutex_;
  std::condition_variable settled_;
  std::map<std::string, BattleState> battles_;
  std::map<std::string, TaskRecord> tasks_;
  std::vector<std::string> battle_order_;
  std::vector<Vote> votes_;
  std::uint64_t next_task_ = 1;
  std::uint64_t next_battle_ = 1;

  std::mutex leaderboard_mutex_;
  std::size_t cached_votes_ = 0;
  std::shared_ptr<const ranking::LeaderboardSnapshot> cached_;

  std::mutex threads_mutex_;
  std::vector<std::jthread> threads_;
};

Json SideResultToJson(const SideResult& result, bool include_model);

}  // namespace arena

#endif  // ARENA_SERVICE_HPP_
