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

#include "arena/service.hpp"

#include <cstdio>
#include <iostream>

#include "arena/error.hpp"
#include "arena/util.hpp"

namespace arena {
namespace {

std::string SequenceId(char prefix, std::uint64_t n) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%c-%06llu", prefix,
                static_cast<unsigned long long>(n));
  return buffer;
}

// Inverse of SequenceId; 0 when the id does not follow the pattern.
std::uint64_t SequenceNumber(const std::string& id) {
  if (id.size() < 3 || id[1] != '-') return 0;
  std::uint64_t n = 0;
  for (std::size_t i = 2; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return 0;
    n = n * 10 + static_cast<std::uint64_t>(id[i] - '0');
  }
  return n;
}

std::string_view SideKey(Side side) { return side == Side::kLeft ? "left" : "right"; }

RunnerSpec RunnerSpecFromJson(const Json& doc) {
  RunnerSpec spec;
  const std::string type = doc.value("type", std::string("mock"));
  if (type == "mock") {
    spec.kind = RunnerSpec::Kind::kMock;
    if (auto it = doc.find("script"); it != doc.end()) {
      spec.script = runner::MockScriptFromJson(*it);
    } else {
      const runner::MockScript ending = runner::MockScriptFromJson(
          {{"ending",
            {{"kind", doc.value("ending", std::string("complete"))},
             {"success", doc.value("success", true)}}}});
      spec.script = runner::GenericScript(doc.value("steps", 3), ending.ending);
      spec.script.step_delay =
          std::chrono::milliseconds(doc.value("step_delay_ms", 0));
    }
  } else if (type == "subprocess") {
    spec.kind = RunnerSpec::Kind::kSubprocess;
    spec.command = doc.at("command").get<std::vector<std::string>>();
    if (spec.command.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "subprocess runner needs a command");
    }
  } else if (type == "http") {
    spec.kind = RunnerSpec::Kind::kHttp;
    spec.url = doc.at("url").get<std::string>();
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown runner type " + type);
  }
  return spec;
}

}  // namespace

std::vector<ModelId> ServiceConfig::models() const {
  std::vector<ModelId> out;
  for (const RosterEntry& entry : roster) out.push_back(entry.model);
  return out;
}

ServiceConfig ServiceConfigFromJson(const Json& doc) {
  ServiceConfig config;
  try {
    config.data_dir = doc.value("data_dir", config.data_dir);
    config.seed = doc.value("seed", config.seed);
    config.max_steps = doc.value("max_steps", config.max_steps);
    config.step_timeout_s = doc.value("step_timeout_s", config.step_timeout_s);
    config.run_timeout_s = doc.value("run_timeout_s", config.run_timeout_s);
    config.allow_include_models =
        doc.value("allow_include_models", config.allow_include_models);
    config.finalize_interrupted =
        doc.value("finalize_interrupted", config.finalize_interrupted);
    config.durable = doc.value("durable", config.durable);
    if (auto it = doc.find("leaderboard"); it != doc.end()) {
      auto& lb = config.leaderboard;
      lb.bootstrap_rounds = it->value("bootstrap_rounds", lb.bootstrap_rounds);
      lb.seed = it->value("seed", config.seed);
      lb.confidence = it->value("confidence", lb.confidence);
      lb.tie_policy = ranking::ParseTiePolicy(
          it->value("tie_policy", std::string(ranking::ToString(lb.tie_policy))));
    } else {
      config.leaderboard.seed = config.seed;
    }
    std::set<std::string> seen;
    for (const Json& entry : doc.value("roster", Json::array())) {
      RosterEntry roster_entry;
      roster_entry.model = ModelId(entry.at("model").get<std::string>());
      if (!seen.insert(roster_entry.model.name).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate roster model " + roster_entry.model.name);
      }
      roster_entry.runner = RunnerSpecFromJson(entry.value("runner", Json::object()));
      config.roster.push_back(std::move(roster_entry));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  return config;
}

std::unique_ptr<runner::RunnerEndpoint> MakeEndpoint(const RunnerSpec& spec) {
  switch (spec.kind) {
    case RunnerSpec::Kind::kMock:
      return std::make_unique<runner::MockRunner>(spec.script);
    case RunnerSpec::Kind::kSubprocess:
      return std::make_unique<runner::SubprocessRunner>(spec.command);
    case RunnerSpec::Kind::kHttp:
      return std::make_unique<runner::HttpRunner>(spec.url);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown runner kind");
}

Json SideResultToJson(const SideResult& result, bool include_model) {
  Json trace = TraceToJson(result.trace);
  if (!include_model) trace.erase("model");
  Json doc = {{"exit", runner::ToString(result.exit)}, {"trace", std::move(trace)}};
  if (result.error_detail) doc["error_detail"] = *result.error_detail;
  return doc;
}

ArenaService::ArenaService(ServiceConfig config, BattleStore& store,
                           EndpointFactory factory)
    : config_(std::move(config)), store_(store), factory_(std::move(factory)) {
  if (!factory_) {
    factory_ = [](const RosterEntry& entry) { return MakeEndpoint(entry.runner); };
  }
  Replay();
  if (config_.finalize_interrupted) FinalizeInterrupted();
}

ArenaService::~ArenaService() {
  std::vector<std::jthread> threads;
  {
    std::lock_guard<std::mutex> lock(threads_mutex_);
    threads.swap(threads_);
  }
  for (auto& thread : threads) thread.request_stop();
  threads.clear();  // joins
}

// ---------------------------------------------------------------------------
// Replay.

void ArenaService::Replay() {
  std::lock_guard<std::mutex> lock(mutex_);
  for (const Json& r : store_.ReadLog(LogKind::kTasks)) ApplyTask(r);
  for (const Json& r : store_.ReadLog(LogKind::kBattles)) ApplyBattle(r);
  for (const Json& r : store_.ReadLog(LogKind::kTraces)) ApplyTrace(r);
  for (const Json& r : store_.ReadLog(LogKind::kVotes)) ApplyVote(r);
  for (const Json& r : store_.ReadLog(LogKind::kAnnotations)) ApplyAnnotations(r);
}

void ArenaService::ApplyTask(const Json& record) {
  TaskRecord task = record.at("task").get<TaskRecord>();
  next_task_ = std::max(next_task_, SequenceNumber(task.id) + 1);
  tasks_[task.id] = std::move(task);
}

void ArenaService::ApplyBattle(const Json& record) {
  const std::string event = record.at("event").get<std::string>();
  const std::string id = record.at("battle_id").get<std::string>();
  if (event == "created") {
    BattleState state;
    state.battle.id = id;
    const std::string task_id = record.at("task_id").get<std::string>();
    auto task = tasks_.find(task_id);
    if (task == tasks_.end()) {
      throw Error(ErrorCode::kStorageError,
                  "battle " + id + " references unknown task " + task_id);
    }
    state.battle.task = task->second;
    state.battle.left_model = record.at("left").get<ModelId>();
    state.battle.right_model = record.at("right").get<ModelId>();
    state.submitter = record.value("submitter", std::string());
    state.battle.status = BattleStatus::kRunning;
    next_battle_ = std::max(next_battle_, SequenceNumber(id) + 1);
    battle_order_.push_back(id);
    battles_.emplace(id, std::move(state));
  } else if (event == "ready") {
    BattleState& state = Find(id);
    if (state.battle.status == BattleStatus::kRunning) {
      state.battle.status = BattleStatus::kReady;
    }
  } else {
    throw Error(ErrorCode::kStorageError, "unknown battle event " + event);
  }
}

void ArenaService::ApplyTrace(const Json& record) {
  BattleState& state = Find(record.at("battle_id").get<std::string>());
  SideResult result;
  result.exit = runner::ParseRunExit(record.at("exit").get<std::string>());
  if (auto it = record.find("error_detail"); it != record.end()) {
    result.error_detail = it->get<std::string>();
  }
  result.trace = TraceFromJson(record.at("trace"));
  const Side side = ParseSide(record.at("side").get<std::string>());
  (side == Side::kLeft ? state.battle.left : state.battle.right) = result.trace;
  (side == Side::kLeft ? state.left : state.right) = std::move(result);
}

void ArenaService::ApplyVote(const Json& record) {
  Vote vote = record.get<Vote>();
  BattleState& state = Find(vote.battle_id);
  state.voters.insert(vote.voter_id);
  state.votes.push_back(vote);
  state.battle.status = BattleStatus::kVoted;
  votes_.push_back(std::move(vote));
}

void ArenaService::ApplyAnnotations(const Json& record) {
  Find(record.at("battle_id").get<std::string>()).annotation_batches.push_back(record);
}

void ArenaService::FinalizeInterrupted() {
  std::vector<std::pair<std::string, Side>> missing;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const std::string& id : battle_order_) {
      BattleState& state = battles_.at(id);
      if (state.battle.status != BattleStatus::kRunning) continue;
      if (state.left && state.right) {
        // Both traces were stored but the ready event was lost.
        store_.Append(LogKind::kBattles, {{"event", "ready"}, {"battle_id", id}});
        state.battle.status = BattleStatus::kReady;
        continue;
      }
      if (!state.left) missing.emplace_back(id, Side::kLeft);
      if (!state.right) missing.emplace_back(id, Side::kRight);
    }
  }
  for (const auto& [id, side] : missing) {
    SideResult result;
    result.exit = runner::RunExit::kRunnerError;
    result.error_detail = "interrupted by a service restart";
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const Battle& battle = battles_.at(id).battle;
      result.trace.task_id = battle.task.id;
      result.trace.model = side == Side::kLeft ? battle.left_model : battle.right_model;
    }
    RecordSide(id, side, std::move(result));
  }
}

// ---------------------------------------------------------------------------
// Task intake and runs.

std::string ArenaService::SubmitTask(const std::string& prompt,
                                     const std::string& submitter) {
  TaskRecord task;
  task.prompt = prompt;
  task.origin = TaskOrigin::kUserSubmitted;
  return StartBattle(std::move(task), submitter);
}

std::vector<std::string> ArenaService::SubmitTasks(
    const std::vector<TaskRecord>& tasks, const std::string& submitter) {
  for (const TaskRecord& task : tasks) {
    if (Trim(task.prompt).empty()) {
      throw Error(ErrorCode::kValidationError, "task prompt must not be empty");
    }
  }
  std::vector<std::string> ids;
  for (const TaskRecord& task : tasks) ids.push_back(StartBattle(task, submitter));
  return ids;
}

std::string ArenaService::StartBattle(TaskRecord task, const std::string& submitter) {
  if (Trim(task.prompt).empty()) {
    throw Error(ErrorCode::kValidationError, "task prompt must not be empty");
  }
  const std::vector<ModelId> models = config_.models();
  if (models.size() < 2) {
    throw Error(ErrorCode::kRosterTooSmall, "the roster needs at least two models");
  }

  std::string battle_id;
  RosterEntry left_entry;
  RosterEntry right_entry;
  runner::RunRequest request;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::uint64_t battle_number = next_battle_;
    battle_id = SequenceId('b', battle_number);
    task.id = SequenceId('t', next_task_);
    task.created_at = NowMillis();

    // One generator per battle keeps sampling independent of restarts.
    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed),
                      static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(battle_number),
                      static_cast<std::uint32_t>(battle_number >> 32)};
    std::mt19937_64 rng(seq);
    const auto [left, right] = runner::SamplePair(models, rng);
    left_entry = *FindEntry(left);
    right_entry = *FindEntry(right);

    store_.Append(LogKind::kTasks, {{"task", task}, {"submitter", submitter}});
    store_.Append(LogKind::kBattles, {{"event", "created"},
                                      {"battle_id", battle_id},
                                      {"task_id", task.id},
                                      {"left", left},
                                      {"right", right},
                                      {"submitter", submitter}});
    ++next_task_;
    ++next_battle_;
    tasks_[task.id] = task;
    BattleState state;
    state.battle.id = battle_id;
    state.battle.task = task;
    state.battle.left_model = left;
    state.battle.right_model = right;
    state.submitter = submitter;
    battles_.emplace(battle_id, std::move(state));
    battle_order_.push_back(battle_id);

    request.task = task;
    request.max_steps = config_.max_steps;
    request.step_timeout_s = config_.step_timeout_s;
    request.run_timeout_s = config_.run_timeout_s;
    request.artifact_dir = store_.artifact_dir().string();
  }

  std::lock_guard<std::mutex> lock(threads_mutex_);
  for (Side side : {Side::kLeft, Side::kRight}) {
    runner::RunRequest side_request = request;
    RosterEntry entry = side == Side::kLeft ? left_entry : right_entry;
    side_request.model = entry.model;
    threads_.emplace_back([this, battle_id, side, entry = std::move(entry),
                           side_request = std::move(side_request)](
                              std::stop_token stop) mutable {
      RunSide(battle_id, side, std::move(entry), std::move(side_request), stop);
    });
  }
  return battle_id;
}

void ArenaService::RunSide(std::string battle_id, Side side, RosterEntry entry,
                           runner::RunRequest request, std::stop_token stop) {
  SideResult side_result;
  try {
    std::unique_ptr<runner::RunnerEndpoint> endpoint = factory_(entry);
    runner::RunResult result = runner::RunAgent(
        request, *endpoint, stop,
        [this](std::string_view bytes) { return store_.PutArtifact(bytes); });
    side_result.exit = result.exit;
    side_result.error_detail = std::move(result.error_detail);
    side_result.trace = std::move(result.trace);
  } catch (const std::exception& e) {
    side_result.exit = runner::RunExit::kRunnerError;
    side_result.error_detail = e.what();
    side_result.trace.task_id = request.task.id;
    side_result.trace.model = request.model;
  }
  try {
    RecordSide(battle_id, side, std::move(side_result));
  } catch (const std::exception& e) {
    std::cerr << "arena: cannot record " << battle_id << "/" << SideKey(side)
              << ": " << e.what() << std::endl;
  }
}

void ArenaService::RecordSide(const std::string& battle_id, Side side,
                              SideResult result) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    BattleState& state = Find(battle_id);
    Json record = {{"battle_id", battle_id},
                   {"side", ToString(side)},
                   {"exit", runner::ToString(result.exit)},
                   {"trace", TraceToJson(result.trace)}};
    if (result.error_detail) record["error_detail"] = *result.error_detail;
    store_.Append(LogKind::kTraces, record);
    (side == Side::kLeft ? state.battle.left : state.battle.right) = result.trace;
    (side == Side::kLeft ? state.left : state.right) = std::move(result);
    if (state.left && state.right && state.battle.status == BattleStatus::kRunning) {
      store_.Append(LogKind::kBattles, {{"event", "ready"}, {"battle_id", battle_id}});
      state.battle.status = BattleStatus::kReady;
    }
  }
  settled_.notify_all();
}

// ---------------------------------------------------------------------------
// Votes and annotations.

Json ArenaService::CastVote(const std::string& battle_id, const std::string& choice,
                            const std::string& voter) {
  if (Trim(voter).empty()) {
    throw Error(ErrorCode::kValidationError, "voter id must not be empty");
  }
  Vote vote;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    BattleState& state = Find(battle_id);
    vote.choice = ParseVoteChoice(choice);
    if (state.battle.status == BattleStatus::kRunning) {
      throw Error(ErrorCode::kBattleNotReady, battle_id + " is still running");
    }
    if (state.voters.count(voter)) {
      throw Error(ErrorCode::kDuplicateVote,
                  voter + " already voted on " + battle_id);
    }
    vote.battle_id = battle_id;
    vote.voter_id = voter;
    vote.cast_at = NowMillis();
    store_.Append(LogKind::kVotes, vote);
    state.voters.insert(voter);
    state.votes.push_back(vote);
    state.battle.status = BattleStatus::kVoted;
    votes_.push_back(vote);

    // Identities are revealed only now that the vote is stored.
    return {{"battle_id", battle_id},
            {"choice", ToString(vote.choice)},
            {"voter", voter},
            {"models",
             {{"left", state.battle.left_model.name},
              {"right", state.battle.right_model.name}}}};
  }
}

Json ArenaService::SubmitAnnotations(const std::string& battle_id,
                                     const std::vector<StepAnnotation>& annotations,
                                     const std::string& annotator) {
  if (annotations.empty()) {
    throw Error(ErrorCode::kValidationError, "no annotations given");
  }
  std::lock_guard<std::mutex> lock(mutex_);
  BattleState& state = Find(battle_id);
  if (state.battle.status == BattleStatus::kRunning) {
    throw Error(ErrorCode::kBattleNotReady, battle_id + " is still running");
  }
  Json items = Json::array();
  std::set<std::pair<Side, int>> seen;
  for (StepAnnotation annotation : annotations) {
    if (annotation.battle_id.empty()) annotation.battle_id = battle_id;
    if (annotation.battle_id != battle_id) {
      throw Error(ErrorCode::kValidationError,
                  "annotation for " + annotation.battle_id + " sent to " + battle_id);
    }
    const std::optional<SideResult>& side =
        annotation.side == Side::kLeft ? state.left : state.right;
    const int steps = side ? static_cast<int>(side->trace.steps.size()) : 0;
    if (annotation.step_index < 0 || annotation.step_index >= steps) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "step " + std::to_string(annotation.step_index) + " of the " +
                      std::string(SideKey(annotation.side)) + " trace (" +
                      std::to_string(steps) + " steps)");
    }
    ValidateAnnotation(annotation);
    if (!seen.insert({annotation.side, annotation.step_index}).second) {
      throw Error(ErrorCode::kValidationError,
                  "step annotated twice in one submission");
    }
    items.push_back(annotation);
  }
  Json record = {{"battle_id", battle_id},
                 {"annotator", annotator},
                 {"submitted_at", NowMillis()},
                 {"annotations", std::move(items)}};
  store_.Append(LogKind::kAnnotations, record);
  state.annotation_batches.push_back(record);
  return {{"battle_id", battle_id},
          {"stored", record["annotations"].size()},
          {"batch", state.annotation_batches.size() - 1}};
}

Json ArenaService::GetAnnotations(const std::string& battle_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const BattleState& state = Find(battle_id);
  Json out = Json::array();
  for (const Json& batch : state.annotation_batches) {
    for (Json item : batch.at("annotations")) {
      item["annotator"] = batch.value("annotator", std::string());
      out.push_back(std::move(item));
    }
  }
  return out;
}

std::vector<Json> ArenaService::ExportAnnotations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<Json> rows;
  for (const std::string& id : battle_order_) {
    const BattleState& state = battles_.at(id);
    for (const Json& batch : state.annotation_batches) {
      for (const Json& item : batch.at("annotations")) {
        const StepAnnotation annotation = item.get<StepAnnotation>();
        const SideResult& side =
            *(annotation.side == Side::kLeft ? state.left : state.right);
        const AgentStep& step =
            side.trace.steps.at(static_cast<std::size_t>(annotation.step_index));
        Json row = item;
        row["annotator"] = batch.value("annotator", std::string());
        row["task_id"] = state.battle.task.id;
        row["task"] = state.battle.task.prompt;
        row["model"] = side.trace.model.name;
        row["goal"] = step.next_goal;
        row["step"] = StepToJson(step);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Views.

Json ArenaService::GetBattle(const std::string& battle_id, const std::string& voter,
                             bool include_models) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const BattleState& state = Find(battle_id);
  const bool reveal = (!voter.empty() && state.voters.count(voter) > 0) ||
                      (include_models && config_.allow_include_models);
  Json view = {{"battle_id", battle_id},
               {"status", ToString(state.battle.status)},
               {"task", state.battle.task},
               {"vote_count", state.votes.size()}};
  for (Side side : {Side::kLeft, Side::kRight}) {
    const std::optional<SideResult>& result =
        side == Side::kLeft ? state.left : state.right;
    if (!result) {
      view[std::string(SideKey(side))] = nullptr;
      continue;
    }
    Json side_view = SideResultToJson(*result, reveal);
    side_view["transcript"] = RenderTranscript(result->trace);
    view[std::string(SideKey(side))] = std::move(side_view);
  }
  if (reveal) {
    view["models"] = {{"left", state.battle.left_model.name},
                      {"right", state.battle.right_model.name}};
  }
  return view;
}

std::vector<std::string> ArenaService::BattleIds() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return battle_order_;
}

Json ArenaService::StateDigest() const {
  std::lock_guard<std::mutex> lock(mutex_);
  Json battles = Json::array();
  for (const std::string& id : battle_order_) {
    const BattleState& state = battles_.at(id);
    Json entry = {{"battle_id", id},
                  {"status", ToString(state.battle.status)},
                  {"task", state.battle.task},
                  {"submitter", state.submitter},
                  {"left_model", state.battle.left_model},
                  {"right_model", state.battle.right_model},
                  {"votes", state.votes},
                  {"annotations", state.annotation_batches}};
    entry["left"] = state.left ? SideResultToJson(*state.left, true) : Json();
    entry["right"] = state.right ? SideResultToJson(*state.right, true) : Json();
    battles.push_back(std::move(entry));
  }
  return {{"battles", std::move(battles)},
          {"next_task", next_task_},
          {"next_battle", next_battle_}};
}

std::optional<std::string> ArenaService::GetArtifact(const std::string& hash) const {
  return store_.GetArtifact(hash);
}

bool ArenaService::WaitUntilSettled(const std::string& battle_id,
                                    std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mutex_);
  return settled_.wait_for(lock, timeout, [&] {
    return Find(battle_id).battle.status != BattleStatus::kRunning;
  });
}

void ArenaService::WaitIdle() {
  std::unique_lock<std::mutex> lock(mutex_);
  settled_.wait(lock, [&] {
    for (const auto& [id, state] : battles_) {
      if (state.battle.status == BattleStatus::kRunning) return false;
    }
    return true;
  });
}

// ---------------------------------------------------------------------------
// Leaderboard.

std::vector<ranking::VoteOutcome> ArenaService::VoteOutcomes() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<ranking::VoteOutcome> outcomes;
  outcomes.reserve(votes_.size());
  for (const Vote& vote : votes_) {
    const Battle& battle = battles_.at(vote.battle_id).battle;
    outcomes.push_back(
        ranking::ToOutcome(battle.left_model, battle.right_model, vote.choice));
  }
  return outcomes;
}

std::vector<ModelId> ArenaService::LeaderboardRoster() const {
  std::vector<ModelId> roster = config_.models();
  std::set<std::string> known;
  for (const ModelId& model : roster) known.insert(model.name);
  std::set<std::string> extra;
  for (const auto& [id, state] : battles_) {
    for (const ModelId* model : {&state.battle.left_model, &state.battle.right_model}) {
      if (!known.count(model->name)) extra.insert(model->name);
    }
  }
  for (const std::string& name : extra) roster.emplace_back(name);
  return roster;
}

std::shared_ptr<const ranking::LeaderboardSnapshot> ArenaService::Leaderboard() {
  std::lock_guard<std::mutex> guard(leaderboard_mutex_);
  std::vector<ranking::VoteOutcome> outcomes = VoteOutcomes();
  if (outcomes.empty()) throw Error(ErrorCode::kNoVotes, "no votes recorded yet");
  if (cached_ && cached_votes_ == outcomes.size()) return cached_;
  std::vector<ModelId> roster;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    roster = LeaderboardRoster();
  }
  cached_ = std::make_shared<const ranking::LeaderboardSnapshot>(
      ranking::BuildLeaderboard(outcomes, roster, config_.leaderboard));
  cached_votes_ = outcomes.size();
  return cached_;
}

std::string ArenaService::LeaderboardJson() {
  return ranking::SnapshotToJson(*Leaderboard()).dump(2) + "\n";
}

std::string ArenaService::LeaderboardCsv() {
  return ranking::SnapshotToCsv(*Leaderboard());
}

// ---------------------------------------------------------------------------

const RosterEntry* ArenaService::FindEntry(const ModelId& model) const {
  for (const RosterEntry& entry : config_.roster) {
    if (entry.model.name == model.name) return &entry;
  }
  return nullptr;
}

ArenaService::BattleState& ArenaService::Find(const std::string& battle_id) {
  auto it = battles_.find(battle_id);
  if (it == battles_.end()) {
    throw Error(ErrorCode::kNotFound, "no battle " + battle_id);
  }
  return it->second;
}

const ArenaService::BattleState& ArenaService::Find(
    const std::string& battle_id) const {
  auto it = battles_.find(battle_id);
  if (it == battles_.end()) {
    throw Error(ErrorCode::kNotFound, "no battle " + battle_id);
  }
  return it->second;
}

}  // namespace arena
