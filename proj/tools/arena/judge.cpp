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
#include <set>

#include "arena/error.hpp"
#include "arena/judge.hpp"
#include "arena/llm.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct JudgeOptions {
  std::string data_dir;
  std::string mode = "pairwise";
  std::string ablation;
  int k = 0;
  std::string model;
  std::string client = "heuristic";
  std::string out;
  std::vector<std::string> battles;
};

struct Tally {
  int judged = 0;
  int already_done = 0;
  int incomplete = 0;
  int malformed = 0;
  int missing_gif = 0;
};

std::unique_ptr<llm::ChatClient> MakeJudgeClient(const std::string& kind) {
  if (kind == "heuristic") return std::make_unique<judge::HeuristicJudgeClient>();
  if (kind == "openai") return llm::OpenAiChatClient::FromEnv();
  throw Error(ErrorCode::kInvalidArgument, "--client must be heuristic or openai");
}

// Pairwise settings from the config's "judge" section, then flags.
judge::JudgeConfig ResolvePairwise(const JudgeOptions& options, const Globals& globals) {
  const Json section = ConfigSection(globals, "judge");
  judge::JudgeConfig config;
  config.model = section.value("model", config.model);
  config.k = section.value("k", config.k);
  config.temperature = section.value("temperature", config.temperature);
  config.max_retries = section.value("max_retries", config.max_retries);
  if (section.contains("ablation")) {
    config.ablation = judge::ParseAblation(section["ablation"].get<std::string>());
  }
  if (options.client == "heuristic") config.model = "heuristic";
  if (!options.model.empty()) config.model = options.model;
  if (options.k > 0) config.k = options.k;
  if (!options.ablation.empty()) config.ablation = judge::ParseAblation(options.ablation);
  judge::ValidateConfig(config);
  return config;
}

judge::ScenarioConfig ResolveScenario(const JudgeOptions& options, const Globals& globals) {
  const Json section = ConfigSection(globals, "judge");
  judge::ScenarioConfig config;
  config.model = section.value("model", config.model);
  config.temperature = section.value("temperature", config.temperature);
  config.max_retries = section.value("max_retries", config.max_retries);
  if (options.client == "heuristic") config.model = "heuristic";
  if (!options.model.empty()) config.model = options.model;
  return config;
}

std::optional<std::string> LoadGif(ArenaService& service, const AgentTrace& trace) {
  if (!trace.gif_ref) return std::nullopt;
  return service.GetArtifact(*trace.gif_ref);
}

class JudgeRun {
 public:
  JudgeRun(const JudgeOptions& options, const Globals& globals)
      : options_(options), globals_(globals), view_(options.data_dir, globals),
        client_(MakeJudgeClient(options.client)) {
    if (std::filesystem::exists(options.out)) {
      for (const judge::VerdictRecord& record : judge::ReadVerdicts(options.out)) {
        done_.insert(record.key());
      }
    }
  }

  Tally Run() {
    std::vector<std::string> ids = options_.battles;
    if (ids.empty()) ids = view_.service().BattleIds();
    for (const std::string& id : ids) {
      const Json battle = view_.service().GetBattle(id, "", /*include_models=*/true);
      if (battle["left"].is_null() || battle["right"].is_null()) {
        ++tally_.incomplete;
        continue;
      }
      if (options_.mode == "pairwise") {
        Pairwise(battle);
      } else {
        for (const char* side : {"left", "right"}) Scenario(battle, side);
      }
    }
    return tally_;
  }

 private:
  bool Claim(const judge::VerdictRecord& record) {
    if (done_.count(record.key())) {
      ++tally_.already_done;
      return false;
    }
    return true;
  }

  void Commit(const judge::VerdictRecord& record) {
    judge::AppendVerdict(options_.out, record);
    done_.insert(record.key());
    ++tally_.judged;
    Info(globals_, "judged " + record.item_id);
  }

  void Pairwise(const Json& battle) {
    const judge::JudgeConfig config = ResolvePairwise(options_, globals_);
    judge::VerdictRecord record;
    record.item_id = battle["battle_id"].get<std::string>();
    record.kind = "pairwise";
    record.judge_model = config.model;
    record.ablation = std::string(judge::ToString(config.ablation));
    record.prompt_version = std::string(judge::kPairwisePrompt);
    if (!Claim(record)) return;

    judge::PairwiseInput input;
    input.item_id = record.item_id;
    input.task = battle["task"]["prompt"].get<std::string>();
    input.agent1 = TraceFromJson(battle["left"]["trace"]);
    input.agent2 = TraceFromJson(battle["right"]["trace"]);
    input.gif1 = LoadGif(view_.service(), input.agent1);
    input.gif2 = LoadGif(view_.service(), input.agent2);
    if (config.ablation != judge::Ablation::kTraceOnly && !(input.gif1 && input.gif2)) {
      ++tally_.missing_gif;
      Info(globals_, record.item_id + ": no GIF for both sides; skipped");
      return;
    }
    judge::PairwiseResult result;
    try {
      result = judge::JudgePairwise(input, *client_, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedVerdict) throw;
      ++tally_.malformed;
      Info(globals_, record.item_id + ": " + e.what());
      return;
    }
    record.verdict = {{"choice", std::string(judge::ToString(result.verdict.choice))}};
    if (result.verdict.confidence) record.verdict["confidence"] = *result.verdict.confidence;
    for (const judge::PreferenceVerdict& sample : result.samples) record.raw.push_back(sample.raw);
    Commit(record);
  }

  void Scenario(const Json& battle, const std::string& side) {
    const judge::ScenarioConfig config = ResolveScenario(options_, globals_);
    judge::VerdictRecord record;
    record.item_id = battle["battle_id"].get<std::string>() + ":" + side;
    record.kind = options_.mode;
    record.judge_model = config.model;
    record.prompt_version = std::string(options_.mode == "captcha" ? judge::kCaptchaPrompt
                                                                   : judge::kBannerPrompt);
    if (!Claim(record)) return;

    const AgentTrace trace = TraceFromJson(battle[side]["trace"]);
    if (trace.steps.empty()) {
      ++tally_.incomplete;
      return;
    }
    try {
      if (options_.mode == "captcha") {
        const judge::CaptchaVerdict verdict = judge::JudgeCaptcha(trace, *client_, config);
        record.verdict = verdict.ToJson();
        record.raw.push_back(verdict.raw);
      } else {
        const judge::BannerVerdict verdict =
            judge::JudgeBanner(trace, battle["task"]["prompt"].get<std::string>(), *client_, config);
        record.verdict = verdict.ToJson();
        record.raw.push_back(verdict.raw);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedVerdict) throw;
      ++tally_.malformed;
      Info(globals_, record.item_id + ": " + e.what());
      return;
    }
    Commit(record);
  }

  const JudgeOptions& options_;
  const Globals& globals_;
  DataView view_;
  std::unique_ptr<llm::ChatClient> client_;
  std::set<std::string> done_;
  Tally tally_;
};

int RunJudge(const JudgeOptions& options, const Globals& globals) {
  if (options.mode != "pairwise" && options.mode != "captcha" && options.mode != "banner") {
    throw Error(ErrorCode::kInvalidArgument, "--mode must be pairwise, captcha or banner");
  }
  const Tally tally = JudgeRun(options, globals).Run();
  const Json summary = {{"mode", options.mode},
                        {"judged", tally.judged},
                        {"already_done", tally.already_done},
                        {"incomplete_battles", tally.incomplete},
                        {"malformed", tally.malformed},
                        {"missing_gif", tally.missing_gif},
                        {"out", options.out}};
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

Command AddJudge(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<JudgeOptions>();
  CLI::App* sub = app.add_subcommand("judge", "Run the automatic judge over stored battles");
  sub->add_option("--data-dir", options->data_dir, "Arena data directory")->required();
  sub->add_option("-o,--out", options->out, "Verdict JSONL; existing verdicts are kept and skipped")
      ->required();
  sub->add_option("--mode", options->mode, "pairwise, captcha or banner")->capture_default_str();
  sub->add_option("--ablation", options->ablation,
                  "Pairwise evidence: trace_and_gif, trace_only or gif_only");
  sub->add_option("--k", options->k, "Samples per pairwise item (majority@k)");
  sub->add_option("--model", options->model, "Judge model name");
  sub->add_option("--client", options->client, "heuristic (offline) or openai")
      ->capture_default_str();
  sub->add_option("--battle", options->battles, "Only these battle ids (repeatable)");
  return {sub, [options, &globals] { return RunJudge(*options, globals); }};
}

}  // namespace arena::cli
