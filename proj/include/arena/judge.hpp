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

#ifndef ARENA_JUDGE_HPP_
#define ARENA_JUDGE_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/domain.hpp"
#include "arena/llm.hpp"

namespace arena::judge {

// Which evidence the pairwise judge sees.
enum class Ablation { kTraceAndGif, kTraceOnly, kGifOnly };
std::string_view ToString(Ablation ablation);
Ablation ParseAblation(std::string_view text);

struct JudgeConfig {
  std::string model = "gpt-4o";
  int k = 5;  // majority@k
  Ablation ablation = Ablation::kTraceAndGif;
  double temperature = 0.0;
  int max_retries = 2;  // re-asks after a malformed answer
};

void ValidateConfig(const JudgeConfig& config);

// ---------------------------------------------------------------------------
// Pairwise preference.

enum class Preference { kAgent1, kAgent2, kTie };
std::string_view ToString(Preference preference);  // "Agent 1", "Agent 2", "Tie"

struct PreferenceVerdict {
  Preference choice = Preference::kTie;
  std::optional<double> confidence;  // only when the judge volunteered one
  std::string raw;
};

// Accepts {"choice": "Agent 1"|"Agent 2"|"Tie"} with an optional numeric
// "confidence", optionally inside one code fence. Anything else throws
// MalformedVerdict.
PreferenceVerdict ParsePreference(std::string_view raw);

// Plurality over the votes; a tie for first place resolves to Tie.
Preference Plurality(const std::vector<Preference>& votes);

// What one side of a battle contributes. Agent 1 is the left side.
struct PairwiseInput {
  std::string item_id;
  std::string task;
  AgentTrace agent1;
  AgentTrace agent2;
  std::optional<std::string> gif1;  // raw bytes
  std::optional<std::string> gif2;
};

struct PairwiseResult {
  PreferenceVerdict verdict;  // aggregate; raw holds the k answers
  std::vector<PreferenceVerdict> samples;
};

// The chat request for one pairwise call under the config's ablation.
// trace_only carries no image; gif_only carries no transcript text.
llm::ChatRequest BuildPairwiseRequest(const PairwiseInput& input,
                                      const JudgeConfig& config);

// Issues k calls (concurrently) and aggregates by plurality. Throws
// InvalidArgument when the ablation needs GIFs that are missing,
// JudgeUnavailable, or MalformedVerdict once retries are exhausted.
PairwiseResult JudgePairwise(const PairwiseInput& input, llm::ChatClient& client,
                             const JudgeConfig& config);

// ---------------------------------------------------------------------------
// Scenario judges with strict schemas.

inline constexpr std::array<std::string_view, 14> kCaptchaKeys = {
    "cache",          "mobile",
    "direct_link",    "google_search",
    "randomized_interaction",
    "reloads",        "new_tab",
    "switch_websites", "internal_navigation",
    "country_domain", "text-only rendering",
    "public_proxy",   "internet_archive",
    "google_travel_integration"};

struct CaptchaVerdict {
  std::array<bool, kCaptchaKeys.size()> values{};
  std::string raw;

  bool get(std::string_view key) const;  // throws InvalidArgument
  Json ToJson() const;
};

inline constexpr std::array<std::string_view, 3> kBannerKeys = {
    "banner_detected", "banner_closed", "task_successfully_completed"};

struct BannerVerdict {
  bool banner_detected = false;
  bool banner_closed = false;
  bool task_successfully_completed = false;
  std::string raw;

  Json ToJson() const;
};

// Strict parsers: a JSON object (optionally inside one code fence) with
// exactly the schema's keys, each a JSON boolean, no duplicates. Banner
// verdicts additionally require banner_closed => banner_detected.
CaptchaVerdict ParseCaptchaVerdict(std::string_view raw);
BannerVerdict ParseBannerVerdict(std::string_view raw);

struct ScenarioConfig {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_retries = 2;
};

// Transcript is the user message. Throws InvalidArgument for an empty trace.
CaptchaVerdict JudgeCaptcha(const AgentTrace& trace, llm::ChatClient& client,
                            const ScenarioConfig& config);
// The task prompt, when known, precedes the transcript.
BannerVerdict JudgeBanner(const AgentTrace& trace, const std::string& task,
                          llm::ChatClient& client, const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Persistence.

// One judged item. Keyed by (item_id, judge_model, ablation, prompt_version);
// ablation is "n/a" for scenario judges.
struct VerdictRecord {
  std::string item_id;
  std::string kind;  // pairwise | captcha | banner
  std::string judge_model;
  std::string ablation = "n/a";
  std::string prompt_version;
  Json verdict;
  std::vector<std::string> raw;

  std::string key() const;
};

Json VerdictRecordToJson(const VerdictRecord& record);
VerdictRecord VerdictRecordFromJson(const Json& doc);
std::vector<VerdictRecord> ReadVerdicts(const std::string& path);
void AppendVerdict(const std::string& path, const VerdictRecord& record);

// Offline stand-in for a judge model: answers the three prompt families by
// keyword heuristics over the transcript. Deterministic; for demos and
// smoke tests, not for measurement.
class HeuristicJudgeClient : public llm::ChatClient {
 public:
  std::string Complete(const llm::ChatRequest& request) override;
};

inline constexpr std::string_view kPairwisePrompt = "pairwise_judge.v1";
inline constexpr std::string_view kCaptchaPrompt = "captcha_judge.v1";
inline constexpr std::string_view kBannerPrompt = "banner_judge.v1";
inline constexpr std::string_view kFormatReminderPrompt = "format_reminder.v1";

}  // namespace arena::judge

#endif  // ARENA_JUDGE_HPP_
