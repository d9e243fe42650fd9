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

#include <fstream>
#include <thread>

#include "arena/error.hpp"
#include "arena/http_server.hpp"
#include "arena/service.hpp"
#include "arena/util.hpp"
#include "doctest.h"
#include "support/temp_dir.hpp"
// After the Eigen-including headers; see http_server.cpp.
#include "httplib.h"

namespace arena {
namespace {

using namespace std::chrono_literals;
using runner::MockEnding;

RosterEntry Mock(const std::string& name, int steps = 2,
                 MockEnding::Kind kind = MockEnding::Kind::kComplete,
                 std::chrono::milliseconds delay = 0ms) {
  MockEnding ending;
  ending.kind = kind;
  RosterEntry entry;
  entry.model = ModelId(name);
  entry.runner.script = runner::GenericScript(steps, ending);
  entry.runner.script.step_delay = delay;
  return entry;
}

ServiceConfig Config(std::vector<RosterEntry> roster) {
  ServiceConfig config;
  config.roster = std::move(roster);
  config.seed = 42;
  config.durable = false;
  config.leaderboard.bootstrap_rounds = 20;
  config.leaderboard.seed = 42;
  return config;
}

ServiceConfig ThreeMocks() {
  return Config({Mock("alpha"), Mock("beta", 3), Mock("gamma", 1)});
}

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected " << ErrorCodeName(code));
  } catch (const Error& e) {
    CHECK_MESSAGE(e.code() == code, e.what());
  }
}

std::string Ready(ArenaService& service, const std::string& prompt = "Find a hotel") {
  const std::string id = service.SubmitTask(prompt, "tester");
  REQUIRE(service.WaitUntilSettled(id, 10s));
  return id;
}

TEST_CASE("submit_task runs both sides and the battle becomes ready") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  const std::string id = service.SubmitTask("Find a hotel in Rome", "u1");
  CHECK(id == "b-000001");
  REQUIRE(service.WaitUntilSettled(id, 10s));
  const Json view = service.GetBattle(id);
  CHECK(view["status"] == "ready");
  CHECK(view["task"]["id"] == "t-000001");
  CHECK(view["task"]["origin"] == "user_submitted");
  for (const char* side : {"left", "right"}) {
    CHECK(view[side]["exit"] == "completed");
    CHECK(view[side]["trace"]["steps"].size() >= 1);
    CHECK(view[side]["transcript"].get<std::string>().find("Task ID: t-000001") == 0);
  }
  CHECK(service.SubmitTask("Another", "u1") == "b-000002");
}

TEST_CASE("submit_task validation") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  ExpectCode(ErrorCode::kValidationError, [&] { service.SubmitTask("", "u"); });
  ExpectCode(ErrorCode::kValidationError, [&] { service.SubmitTask("  \n", "u"); });
  CHECK(service.BattleIds().empty());

  testing::TempDir dir2;
  BattleStore store2(dir2.path(), false);
  ArenaService solo(Config({Mock("only")}), store2);
  ExpectCode(ErrorCode::kRosterTooSmall, [&] { solo.SubmitTask("Find a hotel", "u"); });
}

TEST_CASE("a timed-out side still yields a votable battle") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ServiceConfig config =
      Config({Mock("steady"), Mock("stuck", 2, MockEnding::Kind::kHang)});
  config.step_timeout_s = 0.3;
  ArenaService service(config, store);
  const std::string id = Ready(service);
  const Json view = service.GetBattle(id, "", false);
  std::set<std::string> exits = {view["left"]["exit"], view["right"]["exit"]};
  CHECK(exits == std::set<std::string>{"completed", "timeout"});
  const Json& stuck = view["left"]["exit"] == "timeout" ? view["left"] : view["right"];
  CHECK(stuck["trace"]["steps"].size() == 2);
  CHECK_NOTHROW(service.CastVote(id, "Left", "v1"));
}

TEST_CASE("runner failures on both sides remain votable") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ServiceConfig config = Config({Mock("a"), Mock("b")});
  ArenaService service(config, store, [](const RosterEntry&) -> std::unique_ptr<runner::RunnerEndpoint> {
    return std::make_unique<runner::SubprocessRunner>(
        std::vector<std::string>{"/nonexistent/runner"});
  });
  const std::string id = Ready(service);
  const Json view = service.GetBattle(id);
  CHECK(view["left"]["exit"] == "runner_error");
  CHECK(view["right"]["exit"] == "runner_error");
  CHECK(view["left"]["error_detail"].get<std::string>().find("RunnerUnreachable") !=
        std::string::npos);
  CHECK_NOTHROW(service.CastVote(id, "Tie", "v1"));
}

TEST_CASE("cast_vote semantics") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ServiceConfig config =
      Config({Mock("fast"), Mock("slow", 3, MockEnding::Kind::kComplete, 3000ms)});
  ArenaService service(config, store);

  const std::string pending = service.SubmitTask("Slow task", "u");
  ExpectCode(ErrorCode::kBattleNotReady, [&] { service.CastVote(pending, "Left", "v1"); });
  ExpectCode(ErrorCode::kNotFound, [&] { service.CastVote("b-999999", "Left", "v1"); });

  testing::TempDir dir2;
  BattleStore store2(dir2.path(), false);
  ArenaService quick(ThreeMocks(), store2);
  const std::string id = Ready(quick);
  ExpectCode(ErrorCode::kInvalidChoice, [&] { quick.CastVote(id, "BothBad", "v1"); });
  ExpectCode(ErrorCode::kInvalidChoice, [&] { quick.CastVote(id, "left", "v1"); });
  ExpectCode(ErrorCode::kValidationError, [&] { quick.CastVote(id, "Left", ""); });
  CHECK(quick.VoteOutcomes().empty());

  const Json ack = quick.CastVote(id, "Left", "v1");
  CHECK(ack["choice"] == "Left");
  CHECK(ack["models"]["left"].is_string());
  CHECK(ack["models"]["left"] != ack["models"]["right"]);
  REQUIRE(quick.VoteOutcomes().size() == 1);
  CHECK(quick.VoteOutcomes()[0].left == ModelId(ack["models"]["left"].get<std::string>()));

  ExpectCode(ErrorCode::kDuplicateVote, [&] { quick.CastVote(id, "Right", "v1"); });
  CHECK_NOTHROW(quick.CastVote(id, "Right", "v2"));
  CHECK(quick.VoteOutcomes().size() == 2);
  CHECK(quick.GetBattle(id)["status"] == "voted");
}

TEST_CASE("battle views are blind until the caller has voted") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ServiceConfig config = ThreeMocks();
  ArenaService service(config, store);
  const std::string id = Ready(service);

  auto mentions_model = [&](const Json& view) {
    const std::string text = view.dump();
    for (const ModelId& model : config.models()) {
      if (text.find(model.name) != std::string::npos) return true;
    }
    return false;
  };
  CHECK_FALSE(mentions_model(service.GetBattle(id)));
  CHECK_FALSE(mentions_model(service.GetBattle(id, "v1")));
  // Not authorized by the config.
  CHECK_FALSE(mentions_model(service.GetBattle(id, "", true)));

  service.CastVote(id, "Tie", "v1");
  const Json after = service.GetBattle(id, "v1");
  CHECK(after.contains("models"));
  CHECK(after["left"]["trace"].contains("model"));
  // Another caller who has not voted still sees a blind view.
  CHECK_FALSE(mentions_model(service.GetBattle(id, "v2")));

  ExpectCode(ErrorCode::kNotFound, [&] { service.GetBattle("b-000404"); });
}

TEST_CASE("include_models is honoured only when the config allows it") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ServiceConfig config = ThreeMocks();
  config.allow_include_models = true;
  ArenaService service(config, store);
  const std::string id = Ready(service);
  CHECK_FALSE(service.GetBattle(id).contains("models"));
  CHECK(service.GetBattle(id, "", true).contains("models"));
}

StepAnnotation Annotation(Side side, int index, StepVerdict verdict,
                          std::string reason = "") {
  StepAnnotation a;
  a.side = side;
  a.step_index = index;
  a.verdict = verdict;
  a.reason = std::move(reason);
  return a;
}

TEST_CASE("submit_annotations validates and stores atomically") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(Config({Mock("p", 3), Mock("q", 3)}), store);
  const std::string id = Ready(service);

  const Json ack = service.SubmitAnnotations(
      id,
      {Annotation(Side::kLeft, 2, StepVerdict::kIncorrect, "Clicked the wrong date"),
       Annotation(Side::kRight, 0, StepVerdict::kCorrect)},
      "ann1");
  CHECK(ack["stored"] == 2);

  ExpectCode(ErrorCode::kMissingReason, [&] {
    service.SubmitAnnotations(id, {Annotation(Side::kLeft, 2, StepVerdict::kIncorrect)},
                              "ann1");
  });
  ExpectCode(ErrorCode::kIndexOutOfRange, [&] {
    service.SubmitAnnotations(
        id, {Annotation(Side::kLeft, 99, StepVerdict::kCorrect)}, "ann1");
  });
  ExpectCode(ErrorCode::kIndexOutOfRange, [&] {
    service.SubmitAnnotations(
        id, {Annotation(Side::kLeft, -1, StepVerdict::kCorrect)}, "ann1");
  });
  // A bad item rejects the whole batch.
  ExpectCode(ErrorCode::kMissingReason, [&] {
    service.SubmitAnnotations(
        id,
        {Annotation(Side::kRight, 1, StepVerdict::kCorrect),
         Annotation(Side::kRight, 2, StepVerdict::kIncorrect, "   ")},
        "ann2");
  });

  const Json stored = service.GetAnnotations(id);
  REQUIRE(stored.size() == 2);
  CHECK(stored[0]["reason"] == "Clicked the wrong date");
  CHECK(stored[0]["annotator"] == "ann1");

  const std::vector<Json> export_rows = service.ExportAnnotations();
  REQUIRE(export_rows.size() == 2);
  CHECK(export_rows[0]["verdict"] == "incorrect");
  CHECK(export_rows[0]["goal"].is_string());
  CHECK_FALSE(export_rows[0]["goal"].get<std::string>().empty());
  CHECK(export_rows[0]["task"] == "Find a hotel");
  CHECK(export_rows[0]["step"]["index"] == 2);
}

TEST_CASE("leaderboard requires votes and is cached by vote count") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  ExpectCode(ErrorCode::kNoVotes, [&] { service.Leaderboard(); });
  const std::string id = Ready(service);
  service.CastVote(id, "Left", "v1");
  auto first = service.Leaderboard();
  CHECK(first == service.Leaderboard());
  CHECK(first->fit.roster.size() == 3);
  const std::string id2 = Ready(service, "Second task");
  service.CastVote(id2, "Right", "v1");
  CHECK(first != service.Leaderboard());
  CHECK(service.LeaderboardCsv().rfind("model,beta,lower,upper", 0) == 0);
}

TEST_CASE("concurrent submissions get unique ids and all settle") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  std::vector<std::thread> threads;
  std::mutex ids_mutex;
  std::set<std::string> ids;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        const std::string id = service.SubmitTask(
            "task " + std::to_string(t) + "/" + std::to_string(i), "u");
        std::lock_guard<std::mutex> lock(ids_mutex);
        ids.insert(id);
      }
    });
  }
  for (auto& thread : threads) thread.join();
  service.WaitIdle();
  CHECK(ids.size() == 20);
  for (const std::string& id : ids) CHECK(service.GetBattle(id)["status"] == "ready");
}

TEST_CASE("restart replays logs into identical state and leaderboard bytes") {
  testing::TempDir dir;
  std::string digest;
  std::string leaderboard;
  {
    BattleStore store(dir.path(), false);
    ArenaService service(ThreeMocks(), store);
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) ids.push_back(Ready(service, "task " + std::to_string(i)));
    const char* choices[] = {"Left", "Right", "Tie"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
      service.CastVote(ids[i], choices[i % 3], "v1");
      if (i % 2 == 0) service.CastVote(ids[i], choices[(i + 1) % 3], "v2");
    }
    service.SubmitAnnotations(
        ids[0], {Annotation(Side::kLeft, 0, StepVerdict::kIncorrect, "Wrong site")},
        "ann");
    digest = service.StateDigest().dump();
    leaderboard = service.LeaderboardJson();
  }
  BattleStore store(dir.path(), false);
  ArenaService restarted(ThreeMocks(), store);
  CHECK(restarted.StateDigest().dump() == digest);
  CHECK(restarted.LeaderboardJson() == leaderboard);
  // Ids continue after the replayed ones.
  CHECK(restarted.SubmitTask("after restart", "u") == "b-000013");
  restarted.WaitIdle();
}

TEST_CASE("a torn trailing record is dropped on reopen") {
  testing::TempDir dir;
  std::string digest;
  {
    BattleStore store(dir.path(), false);
    ArenaService service(ThreeMocks(), store);
    service.CastVote(Ready(service), "Left", "v1");
    digest = service.StateDigest().dump();
  }
  {
    std::ofstream votes(dir.path() / "votes.jsonl", std::ios::app);
    votes << R"({"battle_id":"b-000001","choice":"Ri)";
  }
  BattleStore store(dir.path(), false);
  ArenaService restarted(ThreeMocks(), store);
  CHECK(restarted.StateDigest().dump() == digest);
  CHECK_NOTHROW(restarted.CastVote("b-000001", "Right", "v2"));
  CHECK(store.ReadLog(LogKind::kVotes).size() == 2);
}

TEST_CASE("battles interrupted by a crash are finalized on restart") {
  testing::TempDir dir;
  {
    BattleStore store(dir.path(), false);
    TaskRecord task;
    task.id = "t-000001";
    task.prompt = "Interrupted task";
    store.Append(LogKind::kTasks, {{"task", task}, {"submitter", "u"}});
    store.Append(LogKind::kBattles, {{"event", "created"},
                                     {"battle_id", "b-000001"},
                                     {"task_id", "t-000001"},
                                     {"left", "alpha"},
                                     {"right", "beta"}});
  }
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  const Json view = service.GetBattle("b-000001");
  CHECK(view["status"] == "ready");
  CHECK(view["left"]["exit"] == "runner_error");
  CHECK(view["left"]["error_detail"] == "interrupted by a service restart");
  CHECK(service.SubmitTask("next", "u") == "b-000002");
  service.WaitIdle();
}

TEST_CASE("corrupt log lines are storage errors") {
  testing::TempDir dir;
  {
    std::ofstream votes(dir.path() / "votes.jsonl");
    votes << "{broken\n";
  }
  BattleStore store(dir.path(), false);
  ExpectCode(ErrorCode::kStorageError, [&] { ArenaService service(ThreeMocks(), store); });
}

TEST_CASE("artifact store is content addressed") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  const std::string hash = store.PutArtifact("GIF89a-bytes");
  CHECK(hash == Sha256Hex("GIF89a-bytes"));
  CHECK(store.PutArtifact("GIF89a-bytes") == hash);
  CHECK(store.GetArtifact(hash) == std::optional<std::string>("GIF89a-bytes"));
  CHECK_FALSE(store.GetArtifact("../../etc/passwd").has_value());
  CHECK_FALSE(store.GetArtifact(std::string(64, 'a')).has_value());
}

TEST_CASE("service config parsing") {
  const Json doc = Json::parse(R"({
    "data_dir": "d", "seed": 9, "max_steps": 7, "step_timeout_s": 5,
    "leaderboard": {"bootstrap_rounds": 10, "tie_policy": "ignore"},
    "roster": [
      {"model": "m1", "runner": {"type": "mock", "steps": 4}},
      {"model": "m2", "runner": {"type": "subprocess", "command": ["x", "--y"]}},
      {"model": "m3", "runner": {"type": "http", "url": "http://h:1"}}]})");
  const ServiceConfig config = ServiceConfigFromJson(doc);
  CHECK(config.data_dir == "d");
  CHECK(config.max_steps == 7);
  CHECK(config.leaderboard.bootstrap_rounds == 10);
  CHECK(config.leaderboard.tie_policy == ranking::TiePolicy::kIgnore);
  CHECK(config.leaderboard.seed == 9);
  REQUIRE(config.roster.size() == 3);
  CHECK(config.roster[0].runner.script.steps.size() == 4);
  CHECK(config.roster[1].runner.command == std::vector<std::string>{"x", "--y"});
  CHECK(config.roster[2].runner.url == "http://h:1");
  CHECK(MakeEndpoint(config.roster[2].runner)->Describe() == "http:http://h:1");

  ExpectCode(ErrorCode::kInvalidArgument, [] {
    ServiceConfigFromJson(Json::parse(
        R"({"roster": [{"model": "a"}, {"model": "a"}]})"));
  });
  ExpectCode(ErrorCode::kInvalidArgument, [] {
    ServiceConfigFromJson(Json::parse(
        R"({"roster": [{"model": "a", "runner": {"type": "carrier-pigeon"}}]})"));
  });
}

TEST_CASE("HTTP API end to end") {
  testing::TempDir dir;
  BattleStore store(dir.path(), false);
  ArenaService service(ThreeMocks(), store);
  ArenaHttpServer server(service);
  const int port = server.Bind("127.0.0.1", 0);
  std::thread thread([&] { server.Serve(); });
  server.WaitUntilReady();
  httplib::Client client("127.0.0.1", port);

  auto post = [&](const std::string& path, const Json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return std::make_pair(res->status, Json::parse(res->body));
  };
  auto get = [&](const std::string& path) {
    auto res = client.Get(path);
    REQUIRE(res);
    return std::make_pair(res->status, res->body);
  };

  auto [status, body] = post("/tasks", {{"prompt", ""}});
  CHECK(status == 400);
  CHECK(body["error"]["code"] == "ValidationError");

  std::tie(status, body) = post("/tasks", {{"prompt", "Book a table"}, {"submitter", "u"}});
  CHECK(status == 202);
  const std::string id = body["battle_id"];
  REQUIRE(service.WaitUntilSettled(id, 10s));

  auto [view_status, view_text] = get("/battles/" + id);
  CHECK(view_status == 200);
  for (const char* name : {"alpha", "beta", "gamma"}) {
    CHECK(view_text.find(name) == std::string::npos);
  }
  CHECK(get("/battles/b-424242").first == 404);

  CHECK(get("/leaderboard").first == 409);

  std::tie(status, body) = post("/battles/" + id + "/vote",
                                {{"choice", "BothBad"}, {"voter", "v"}});
  CHECK(status == 400);
  CHECK(body["error"]["code"] == "InvalidChoice");
  std::tie(status, body) = post("/battles/" + id + "/vote",
                                {{"choice", "Right"}, {"voter", "v"}});
  CHECK(status == 200);
  CHECK(body["models"].contains("left"));
  std::tie(status, body) = post("/battles/" + id + "/vote",
                                {{"choice", "Right"}, {"voter", "v"}});
  CHECK(status == 409);
  CHECK(body["error"]["code"] == "DuplicateVote");
  CHECK(get("/battles/" + id + "?voter=v").second.find("\"models\"") != std::string::npos);

  std::tie(status, body) = post(
      "/battles/" + id + "/annotations",
      {{"annotator", "a"},
       {"annotations",
        {{{"side", "left"}, {"step_index", 0}, {"verdict", "incorrect"}, {"reason", ""}}}}});
  CHECK(status == 400);
  CHECK(body["error"]["code"] == "MissingReason");
  std::tie(status, body) = post(
      "/battles/" + id + "/annotations",
      {{"annotator", "a"},
       {"annotations",
        {{{"side", "left"}, {"step_index", 0}, {"verdict", "incorrect"},
          {"reason", "Searched the wrong city"}}}}});
  CHECK(status == 200);
  CHECK(Json::parse(get("/battles/" + id + "/annotations").second).size() == 1);
  CHECK(get("/annotations").second.find("Searched the wrong city") != std::string::npos);

  auto [lb_status, lb] = get("/leaderboard");
  CHECK(lb_status == 200);
  CHECK(lb == service.LeaderboardJson());
  CHECK(get("/leaderboard?format=csv").second.rfind("model,", 0) == 0);

  const std::string hash = store.PutArtifact("frame-bytes");
  CHECK(get("/artifacts/" + hash).second == "frame-bytes");
  CHECK(get("/artifacts/" + std::string(64, '0')).first == 404);
  CHECK(get("/healthz").first == 200);

  server.Stop();
  thread.join();
}

}  // namespace
}  // namespace arena
