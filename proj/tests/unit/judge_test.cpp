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

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "arena/error.hpp"
#include "arena/judge.hpp"
#include "arena/util.hpp"
#include "doctest.h"
#include "support/captcha_fuzz.hpp"
#include "support/temp_dir.hpp"
#include "httplib.h"

namespace arena::judge {
namespace {

using llm::ScriptedChatClient;

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected " << ErrorCodeName(code));
  } catch (const Error& e) {
    CHECK_MESSAGE(e.code() == code, e.what());
  }
}

AgentTrace Fixture() {
  return ParseTrace(ReadFile(std::filesystem::path(ARENA_FIXTURE_DIR) /
                             "trace_two_step.json"));
}

PairwiseInput Input() {
  PairwiseInput input;
  input.item_id = "b-000001";
  input.task = "Find the last train from Cardiff Central to Barry Docks";
  input.agent1 = Fixture();
  input.agent2 = Fixture();
  input.agent2.steps.pop_back();
  RefreshFinalSuccess(input.agent2);
  input.gif1 = "GIF89a-one";
  input.gif2 = "GIF89a-two";
  return input;
}

std::string Choice(std::string_view c) {
  return Json({{"choice", c}}).dump();
}

using testing::CaptchaWorkedExampleCorrected;
using testing::CaptchaWorkedExampleVerbatim;

TEST_CASE("plurality aggregation") {
  using P = Preference;
  CHECK(Plurality({P::kAgent1, P::kAgent1, P::kAgent2, P::kTie, P::kAgent1}) == P::kAgent1);
  CHECK(Plurality({P::kAgent1, P::kAgent1, P::kAgent2, P::kAgent2, P::kTie}) == P::kTie);
  CHECK(Plurality({P::kAgent1, P::kAgent2, P::kTie}) == P::kTie);
  CHECK(Plurality({P::kAgent2}) == P::kAgent2);
  CHECK(Plurality({P::kTie, P::kTie, P::kAgent1}) == P::kTie);

  // Symmetric under permutation.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<P> votes(1 + UniformBelow(rng, 9));
    for (auto& v : votes) v = static_cast<P>(UniformBelow(rng, 3));
    const P expected = Plurality(votes);
    for (int p = 0; p < 5; ++p) {
      SeededShuffle(votes, rng);
      CHECK(Plurality(votes) == expected);
    }
  }
}

TEST_CASE("judge_pairwise aggregates k scripted answers") {
  ScriptedChatClient plurality({Choice("Agent 1"), Choice("Agent 1"), Choice("Agent 2"),
                                Choice("Tie"), Choice("Agent 1")});
  JudgeConfig config;
  config.k = 5;
  PairwiseResult result = JudgePairwise(Input(), plurality, config);
  CHECK(result.verdict.choice == Preference::kAgent1);
  CHECK(result.samples.size() == 5);
  CHECK(plurality.calls() == 5);

  ScriptedChatClient split({Choice("Agent 1"), Choice("Agent 1"), Choice("Agent 2"),
                            Choice("Agent 2"), Choice("Tie")});
  CHECK(JudgePairwise(Input(), split, config).verdict.choice == Preference::kTie);

  for (int k : {1, 2, 3, 5, 8}) {
    ScriptedChatClient always({Choice("Agent 2")});
    config.k = k;
    CHECK(JudgePairwise(Input(), always, config).verdict.choice == Preference::kAgent2);
    CHECK(always.calls() == static_cast<std::size_t>(k));
  }
  config.k = 0;
  ScriptedChatClient any({Choice("Tie")});
  ExpectCode(ErrorCode::kInvalidArgument, [&] { JudgePairwise(Input(), any, config); });
}

TEST_CASE("preference parsing") {
  CHECK(ParsePreference(R"({"choice": "Agent 1"})").choice == Preference::kAgent1);
  CHECK(ParsePreference("```json\n{\"choice\": \"Agent 2\"}\n```").choice ==
        Preference::kAgent2);
  const PreferenceVerdict v = ParsePreference(R"({"choice": "Tie", "confidence": 0.8})");
  CHECK(v.choice == Preference::kTie);
  CHECK(v.confidence == std::optional<double>(0.8));
  CHECK_FALSE(ParsePreference(R"({"choice": "Agent 1"})").confidence.has_value());
  for (const char* bad : {"Agent 1", R"({"choice": "Both bad"})", R"({"choice": 1})",
                          R"({"choice": "Tie", "why": "x"})", R"({"answer": "Tie"})",
                          R"({"choice": "Tie", "confidence": "high"})",
                          R"({"choice": "Tie", "choice": "Agent 1"})", "[]",
                          "Sure! {\"choice\": \"Tie\"}"}) {
    ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParsePreference(bad); });
  }
}

TEST_CASE("malformed answers are retried with a format reminder, then fail") {
  ScriptedChatClient recovers({"I think Agent 1 did better.", Choice("Agent 1")}, false);
  JudgeConfig config;
  config.k = 1;
  CHECK(JudgePairwise(Input(), recovers, config).verdict.choice == Preference::kAgent1);
  const auto requests = recovers.requests();
  REQUIRE(requests.size() == 2);
  REQUIRE(requests[1].messages.size() == requests[0].messages.size() + 2);
  CHECK(requests[1].messages.back().text == PromptTemplate(kFormatReminderPrompt));
  CHECK(requests[1].messages[requests[1].messages.size() - 2].text ==
        "I think Agent 1 did better.");

  ScriptedChatClient hopeless({"nope"});
  config.max_retries = 2;
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { JudgePairwise(Input(), hopeless, config); });
  CHECK(hopeless.calls() == 3);

  ScriptedChatClient silent({}, false);
  ExpectCode(ErrorCode::kJudgeUnavailable, [&] { JudgePairwise(Input(), silent, config); });
}

TEST_CASE("ablation isolation on the mock transport") {
  const PairwiseInput input = Input();
  JudgeConfig config;
  config.k = 3;
  const std::string transcript1 = RenderTranscript(input.agent1);

  config.ablation = Ablation::kTraceOnly;
  ScriptedChatClient trace_only({Choice("Tie")});
  JudgePairwise(input, trace_only, config);
  for (const auto& request : trace_only.requests()) {
    CHECK(llm::ImageCount(request) == 0);
    CHECK(llm::JoinedText(request).find(transcript1) != std::string::npos);
  }

  config.ablation = Ablation::kGifOnly;
  ScriptedChatClient gif_only({Choice("Tie")});
  JudgePairwise(input, gif_only, config);
  for (const auto& request : gif_only.requests()) {
    CHECK(llm::ImageCount(request) == 2);
    const std::string text = llm::JoinedText(request);
    for (const AgentTrace* trace : {&input.agent1, &input.agent2}) {
      for (const AgentStep& step : trace->steps) {
        CHECK(text.find(step.memory) == std::string::npos);
        CHECK(text.find(step.next_goal) == std::string::npos);
      }
    }
    CHECK(text.find("Task ID:") == std::string::npos);
    CHECK(text.find(input.task) != std::string::npos);
  }

  config.ablation = Ablation::kTraceAndGif;
  ScriptedChatClient both({Choice("Tie")});
  JudgePairwise(input, both, config);
  CHECK(llm::ImageCount(both.requests()[0]) == 2);
  CHECK(llm::JoinedText(both.requests()[0]).find(transcript1) != std::string::npos);

  PairwiseInput no_gif = input;
  no_gif.gif2.reset();
  config.ablation = Ablation::kGifOnly;
  ExpectCode(ErrorCode::kInvalidArgument, [&] { JudgePairwise(no_gif, both, config); });
  config.ablation = Ablation::kTraceOnly;
  CHECK_NOTHROW(JudgePairwise(no_gif, both, config));

  CHECK(ParseAblation("gif_only") == Ablation::kGifOnly);
  ExpectCode(ErrorCode::kInvalidArgument, [] { ParseAblation("audio_only"); });
}

TEST_CASE("captcha worked example") {
  const CaptchaVerdict verdict = ParseCaptchaVerdict(CaptchaWorkedExampleCorrected());
  for (std::string_view key : kCaptchaKeys) {
    CHECK_MESSAGE(verdict.get(key) == (key == "reloads" || key == "new_tab"), key);
  }
  // The example as printed lacks a colon after "internal_navigation" and is
  // not JSON; strict parsing rejects it.
  ExpectCode(ErrorCode::kMalformedVerdict,
             [] { ParseCaptchaVerdict(CaptchaWorkedExampleVerbatim()); });
}

TEST_CASE("captcha schema violations") {
  Json valid = ParseCaptchaVerdict(CaptchaWorkedExampleCorrected()).ToJson();
  CHECK_NOTHROW(ParseCaptchaVerdict(valid.dump()));

  Json missing = valid;
  missing.erase("public_proxy");
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParseCaptchaVerdict(missing.dump()); });

  Json extra = valid;
  extra["other"] = false;
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParseCaptchaVerdict(extra.dump()); });

  Json spaced = valid;
  spaced.erase("public_proxy");
  spaced["public proxy"] = false;
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParseCaptchaVerdict(spaced.dump()); });

  Json stringly = valid;
  stringly["cache"] = "false";
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParseCaptchaVerdict(stringly.dump()); });

  std::string duplicated = valid.dump();
  duplicated.insert(1, "\"cache\":true,");
  ExpectCode(ErrorCode::kMalformedVerdict, [&] { ParseCaptchaVerdict(duplicated); });

  ExpectCode(ErrorCode::kMalformedVerdict,
             [&] { ParseCaptchaVerdict("Here you go:\n" + valid.dump()); });
  ExpectCode(ErrorCode::kMalformedVerdict,
             [&] { ParseCaptchaVerdict(Json::array({valid}).dump()); });
}

TEST_CASE("captcha fuzzing: mutated outputs are never accepted") {
  std::mt19937_64 rng(20261017);
  int accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string doc = testing::MutatedCaptchaAnswer(rng);
    try {
      const CaptchaVerdict verdict = ParseCaptchaVerdict(doc);
      // Soundness: whatever is accepted must re-serialize to the schema.
      CHECK_NOTHROW(ParseCaptchaVerdict(verdict.ToJson().dump()));
      ++accepted;
      FAIL_CHECK("accepted out-of-schema output: " << doc);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedVerdict);
    }
  }
  CHECK(accepted == 0);

  // Every in-schema assignment is accepted and round-trips.
  for (int trial = 0; trial < 200; ++trial) {
    CaptchaVerdict v;
    for (auto& b : v.values) b = UniformBelow(rng, 2) == 1;
    CHECK(ParseCaptchaVerdict(v.ToJson().dump()).values == v.values);
  }
}

TEST_CASE("banner verdicts") {
  const BannerVerdict none = ParseBannerVerdict(
      R"({"banner_detected": false, "banner_closed": false, "task_successfully_completed": false})");
  CHECK_FALSE(none.banner_detected);
  const BannerVerdict all = ParseBannerVerdict(
      R"({"banner_detected": true, "banner_closed": true, "task_successfully_completed": true})");
  CHECK(all.banner_closed);
  CHECK(ParseBannerVerdict(all.ToJson().dump()).task_successfully_completed);
  ExpectCode(ErrorCode::kMalformedVerdict, [] {
    ParseBannerVerdict(R"({"banner_detected": true, "banner_closed": true})");
  });
  ExpectCode(ErrorCode::kMalformedVerdict, [] {
    ParseBannerVerdict(
        R"({"banner_detected": false, "banner_closed": true, "task_successfully_completed": false})");
  });
  ExpectCode(ErrorCode::kMalformedVerdict, [] {
    ParseBannerVerdict(
        R"({"banner_detected": "True", "banner_closed": false, "task_successfully_completed": false})");
  });
}

TEST_CASE("scenario judges send the template and the transcript") {
  const AgentTrace trace = Fixture();
  ScriptedChatClient client({"{}", CaptchaWorkedExampleCorrected()}, false);
  const CaptchaVerdict verdict = JudgeCaptcha(trace, client, ScenarioConfig{});
  CHECK(verdict.get("reloads"));
  const auto requests = client.requests();
  REQUIRE(requests.size() == 2);
  CHECK(requests[0].messages[0].role == llm::Message::Role::kSystem);
  CHECK(requests[0].messages[0].text == PromptTemplate(kCaptchaPrompt));
  CHECK(requests[0].messages[1].text == RenderTranscript(trace));

  ScriptedChatClient banner(
      {R"({"banner_detected": true, "banner_closed": false, "task_successfully_completed": true})"});
  const BannerVerdict b = JudgeBanner(trace, "Accept cookies on bbc.com", banner, {});
  CHECK(b.banner_detected);
  CHECK(banner.requests()[0].messages[1].text.rfind("Task: Accept cookies on bbc.com", 0) == 0);

  AgentTrace empty = trace;
  empty.steps.clear();
  ExpectCode(ErrorCode::kInvalidArgument, [&] { JudgeCaptcha(empty, client, {}); });
}

TEST_CASE("verdict records round-trip through JSONL") {
  testing::TempDir dir;
  const std::string path = (dir.path() / "verdicts.jsonl").string();
  VerdictRecord record;
  record.item_id = "b-000003";
  record.kind = "pairwise";
  record.judge_model = "gpt-4o";
  record.ablation = "trace_only";
  record.prompt_version = std::string(kPairwisePrompt);
  record.verdict = {{"choice", "Agent 1"}};
  record.raw = {Choice("Agent 1")};
  AppendVerdict(path, record);
  record.item_id = "b-000004";
  AppendVerdict(path, record);
  const auto records = ReadVerdicts(path);
  REQUIRE(records.size() == 2);
  CHECK(VerdictRecordToJson(records[1]) == VerdictRecordToJson(record));
  CHECK(records[0].key() == "b-000003|gpt-4o|trace_only|pairwise_judge.v1");
}

TEST_CASE("heuristic judge answers every prompt family in schema") {
  AgentTrace trace = Fixture();
  trace.steps[0].memory = "Expedia showed a captcha; reloading and trying a new tab.";
  HeuristicJudgeClient client;
  const CaptchaVerdict captcha = JudgeCaptcha(trace, client, {});
  CHECK(captcha.get("reloads"));
  CHECK(captcha.get("new_tab"));
  CHECK(captcha.get("google_search"));
  CHECK_FALSE(captcha.get("internet_archive"));
  CHECK_NOTHROW(JudgeBanner(trace, "", client, {}));

  JudgeConfig config;
  config.k = 3;
  config.ablation = Ablation::kTraceOnly;
  CHECK(JudgePairwise(Input(), client, config).verdict.choice == Preference::kAgent1);
}

TEST_CASE("OpenAI-compatible client") {
  llm::ChatRequest request;
  request.model = "judge-x";
  request.messages.push_back({llm::Message::Role::kSystem, "sys", {}});
  request.messages.push_back({llm::Message::Role::kUser, "look", {{"image/gif", "GIF"}}});
  const Json body = llm::OpenAiChatClient::RequestBody(request);
  CHECK(body["model"] == "judge-x");
  CHECK(body["messages"][0]["content"] == "sys");
  CHECK(body["messages"][1]["content"][1]["image_url"]["url"] ==
        "data:image/gif;base64," + Base64Encode("GIF"));

  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request& req,
                                          httplib::Response& res) {
    if (req.get_header_value("Authorization") != "Bearer test-key") {
      res.status = 401;
      return;
    }
    const Json in = Json::parse(req.body);
    const Json out = {{"choices",
                       {{{"message",
                          {{"role", "assistant"},
                           {"content", Choice(in["model"] == "judge-x" ? "Agent 2" : "Tie")}}}}}}};
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  llm::OpenAiChatClient client("http://127.0.0.1:" + std::to_string(port), "test-key");
  CHECK(ParsePreference(client.Complete(request)).choice == Preference::kAgent2);
  llm::OpenAiChatClient wrong_key("http://127.0.0.1:" + std::to_string(port), "nope");
  ExpectCode(ErrorCode::kClientUnavailable, [&] { wrong_key.Complete(request); });

  server.stop();
  thread.join();
  ExpectCode(ErrorCode::kClientUnavailable, [&] { client.Complete(request); });
}

TEST_CASE("code fence stripping") {
  CHECK(llm::StripCodeFence("```json\n{}\n```") == "{}");
  CHECK(llm::StripCodeFence("  ```\n{\"a\":1}\n```  ") == "{\"a\":1}");
  CHECK(llm::StripCodeFence("{}") == "{}");
  CHECK(llm::StripCodeFence("```\n{}\n```\n```\n{}\n```") == "```\n{}\n```\n```\n{}\n```");
  CHECK(llm::StripCodeFence("```js on\n{}\n```") == "```js on\n{}\n```");
}

}  // namespace
}  // namespace arena::judge
