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

#include "arena/judge.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "arena/error.hpp"
#include "arena/util.hpp"

namespace arena::judge {
namespace {

[[noreturn]] void Malformed(const std::string& message) {
  throw Error(ErrorCode::kMalformedVerdict, message);
}

// Parses `raw` as one JSON object, rejecting duplicate keys at any depth
// (the stock parser would keep the last one silently).
Json ParseObjectStrict(std::string_view raw) {
  const std::string body = llm::StripCodeFence(raw);
  std::vector<std::set<std::string>> open_objects;
  bool duplicate = false;
  Json doc;
  try {
    doc = Json::parse(body, [&](int, Json::parse_event_t event, Json& parsed) {
      switch (event) {
        case Json::parse_event_t::object_start:
          open_objects.emplace_back();
          break;
        case Json::parse_event_t::object_end:
          open_objects.pop_back();
          break;
        case Json::parse_event_t::key:
          if (!open_objects.back().insert(parsed.get<std::string>()).second) {
            duplicate = true;
          }
          break;
        default:
          break;
      }
      return true;
    });
  } catch (const Json::exception& e) {
    Malformed(std::string("not valid JSON: ") + e.what());
  }
  if (duplicate) Malformed("duplicate key");
  if (!doc.is_object()) Malformed("expected a JSON object");
  return doc;
}

template <std::size_t N>
std::array<bool, N> StrictBooleans(const Json& doc,
                                   const std::array<std::string_view, N>& keys) {
  std::array<bool, N> values{};
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (std::size_t i = 0; i < N; ++i) {
      if (keys[i] != key) continue;
      known = true;
      if (!value.is_boolean()) Malformed("\"" + key + "\" must be a boolean");
      values[i] = value.template get<bool>();
    }
    if (!known) Malformed("unexpected key \"" + key + "\"");
  }
  for (std::string_view key : keys) {
    if (!doc.contains(std::string(key))) {
      Malformed("missing key \"" + std::string(key) + "\"");
    }
  }
  return values;
}

std::string Reminder() { return std::string(PromptTemplate(kFormatReminderPrompt)); }

llm::ChatRequest ScenarioRequest(std::string_view prompt, std::string user,
                                 const ScenarioConfig& config) {
  llm::ChatRequest request;
  request.model = config.model;
  request.temperature = config.temperature;
  request.messages.push_back(
      {llm::Message::Role::kSystem, std::string(PromptTemplate(prompt)), {}});
  request.messages.push_back({llm::Message::Role::kUser, std::move(user), {}});
  return request;
}

std::string NormalizeChoice(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::string_view ToString(Ablation ablation) {
  switch (ablation) {
    case Ablation::kTraceAndGif: return "trace_and_gif";
    case Ablation::kTraceOnly: return "trace_only";
    case Ablation::kGifOnly: return "gif_only";
  }
  return "trace_and_gif";
}

Ablation ParseAblation(std::string_view text) {
  for (Ablation a : {Ablation::kTraceAndGif, Ablation::kTraceOnly, Ablation::kGifOnly}) {
    if (ToString(a) == text) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown ablation " + std::string(text));
}

std::string_view ToString(Preference preference) {
  switch (preference) {
    case Preference::kAgent1: return "Agent 1";
    case Preference::kAgent2: return "Agent 2";
    case Preference::kTie: return "Tie";
  }
  return "Tie";
}

void ValidateConfig(const JudgeConfig& config) {
  if (config.k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (config.max_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  }
}

PreferenceVerdict ParsePreference(std::string_view raw) {
  const Json doc = ParseObjectStrict(raw);
  PreferenceVerdict verdict;
  verdict.raw = std::string(raw);
  for (const auto& [key, value] : doc.items()) {
    if (key != "choice" && key != "confidence") Malformed("unexpected key \"" + key + "\"");
  }
  auto choice = doc.find("choice");
  if (choice == doc.end() || !choice->is_string()) Malformed("missing string \"choice\"");
  const std::string normalized = NormalizeChoice(choice->get<std::string>());
  if (normalized == "agent1") {
    verdict.choice = Preference::kAgent1;
  } else if (normalized == "agent2") {
    verdict.choice = Preference::kAgent2;
  } else if (normalized == "tie") {
    verdict.choice = Preference::kTie;
  } else {
    Malformed("choice must be Agent 1, Agent 2 or Tie");
  }
  if (auto it = doc.find("confidence"); it != doc.end() && !it->is_null()) {
    if (!it->is_number() || !std::isfinite(it->get<double>())) {
      Malformed("confidence must be a number");
    }
    verdict.confidence = it->get<double>();
  }
  return verdict;
}

Preference Plurality(const std::vector<Preference>& votes) {
  std::array<int, 3> counts{};
  for (Preference p : votes) ++counts[static_cast<std::size_t>(p)];
  const int best = *std::max_element(counts.begin(), counts.end());
  int leaders = 0;
  std::size_t leader = 2;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == best) {
      ++leaders;
      leader = i;
    }
  }
  if (leaders != 1) return Preference::kTie;
  return static_cast<Preference>(leader);
}

llm::ChatRequest BuildPairwiseRequest(const PairwiseInput& input,
                                      const JudgeConfig& config) {
  const bool with_trace = config.ablation != Ablation::kGifOnly;
  const bool with_gif = config.ablation != Ablation::kTraceOnly;
  if (with_gif && (!input.gif1 || !input.gif2)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(ToString(config.ablation)) + " needs a GIF for both agents");
  }
  llm::ChatRequest request;
  request.model = config.model;
  request.temperature = config.temperature;
  request.messages.push_back(
      {llm::Message::Role::kSystem, std::string(PromptTemplate(kPairwisePrompt)), {}});

  std::string text = "Task: " + input.task + "\n";
  if (with_trace) {
    text += "\nAgent 1 trace:\n" + RenderTranscript(input.agent1);
    text += "\nAgent 2 trace:\n" + RenderTranscript(input.agent2);
  }
  llm::Message user{llm::Message::Role::kUser, {}, {}};
  if (with_gif) {
    text += "\nThe attached recordings show Agent 1 and then Agent 2.\n";
    user.images.push_back({"image/gif", *input.gif1});
    user.images.push_back({"image/gif", *input.gif2});
  }
  user.text = std::move(text);
  request.messages.push_back(std::move(user));
  return request;
}

PairwiseResult JudgePairwise(const PairwiseInput& input, llm::ChatClient& client,
                             const JudgeConfig& config) {
  ValidateConfig(config);
  const llm::ChatRequest request = BuildPairwiseRequest(input, config);
  const std::string reminder = Reminder();
  std::vector<PreferenceVerdict> samples(static_cast<std::size_t>(config.k));
  ParallelFor(samples.size(), [&](std::size_t i) {
    samples[i] = llm::AskUntilParsed(client, request, config.max_retries, reminder,
                                     ErrorCode::kJudgeUnavailable, ParsePreference);
  });

  PairwiseResult result;
  std::vector<Preference> votes;
  Json raws = Json::array();
  for (const PreferenceVerdict& sample : samples) {
    votes.push_back(sample.choice);
    raws.push_back(sample.raw);
  }
  result.verdict.choice = Plurality(votes);
  result.verdict.raw = raws.dump();
  // The aggregate keeps a confidence only when every sample reported one.
  double total = 0;
  bool all = true;
  for (const PreferenceVerdict& sample : samples) {
    if (!sample.confidence) all = false;
    else total += *sample.confidence;
  }
  if (all) result.verdict.confidence = total / static_cast<double>(samples.size());
  result.samples = std::move(samples);
  return result;
}

// ---------------------------------------------------------------------------

bool CaptchaVerdict::get(std::string_view key) const {
  for (std::size_t i = 0; i < kCaptchaKeys.size(); ++i) {
    if (kCaptchaKeys[i] == key) return values[i];
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown captcha key " + std::string(key));
}

Json CaptchaVerdict::ToJson() const {
  Json doc = Json::object();
  for (std::size_t i = 0; i < kCaptchaKeys.size(); ++i) {
    doc[std::string(kCaptchaKeys[i])] = values[i];
  }
  return doc;
}

Json BannerVerdict::ToJson() const {
  return {{"banner_detected", banner_detected},
          {"banner_closed", banner_closed},
          {"task_successfully_completed", task_successfully_completed}};
}

CaptchaVerdict ParseCaptchaVerdict(std::string_view raw) {
  CaptchaVerdict verdict;
  verdict.values = StrictBooleans(ParseObjectStrict(raw), kCaptchaKeys);
  verdict.raw = std::string(raw);
  return verdict;
}

BannerVerdict ParseBannerVerdict(std::string_view raw) {
  const auto values = StrictBooleans(ParseObjectStrict(raw), kBannerKeys);
  BannerVerdict verdict;
  verdict.banner_detected = values[0];
  verdict.banner_closed = values[1];
  verdict.task_successfully_completed = values[2];
  if (verdict.banner_closed && !verdict.banner_detected) {
    Malformed("banner_closed is true but no banner was detected");
  }
  verdict.raw = std::string(raw);
  return verdict;
}

CaptchaVerdict JudgeCaptcha(const AgentTrace& trace, llm::ChatClient& client,
                            const ScenarioConfig& config) {
  if (trace.steps.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trace " + trace.task_id + " has no steps");
  }
  return llm::AskUntilParsed(
      client, ScenarioRequest(kCaptchaPrompt, RenderTranscript(trace), config),
      config.max_retries, Reminder(), ErrorCode::kJudgeUnavailable,
      ParseCaptchaVerdict);
}

BannerVerdict JudgeBanner(const AgentTrace& trace, const std::string& task,
                          llm::ChatClient& client, const ScenarioConfig& config) {
  if (trace.steps.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trace " + trace.task_id + " has no steps");
  }
  std::string user = RenderTranscript(trace);
  if (!task.empty()) user = "Task: " + task + "\n\n" + user;
  return llm::AskUntilParsed(client, ScenarioRequest(kBannerPrompt, user, config),
                             config.max_retries, Reminder(),
                             ErrorCode::kJudgeUnavailable, ParseBannerVerdict);
}

// ---------------------------------------------------------------------------

std::string VerdictRecord::key() const {
  return item_id + "|" + judge_model + "|" + ablation + "|" + prompt_version;
}

Json VerdictRecordToJson(const VerdictRecord& record) {
  return {{"item_id", record.item_id},
          {"kind", record.kind},
          {"judge_model", record.judge_model},
          {"ablation", record.ablation},
          {"prompt_version", record.prompt_version},
          {"verdict", record.verdict},
          {"raw", record.raw}};
}

VerdictRecord VerdictRecordFromJson(const Json& doc) {
  VerdictRecord record;
  try {
    record.item_id = doc.at("item_id").get<std::string>();
    record.kind = doc.at("kind").get<std::string>();
    record.judge_model = doc.at("judge_model").get<std::string>();
    record.ablation = doc.value("ablation", std::string("n/a"));
    record.prompt_version = doc.at("prompt_version").get<std::string>();
    record.verdict = doc.at("verdict");
    record.raw = doc.value("raw", std::vector<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("verdict record: ") + e.what());
  }
  return record;
}

std::vector<VerdictRecord> ReadVerdicts(const std::string& path) {
  std::vector<VerdictRecord> records;
  for (const std::string& line : SplitLines(ReadFile(path))) {
    if (Trim(line).empty()) continue;
    try {
      records.push_back(VerdictRecordFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchemaError, path + ": " + e.what());
    }
  }
  return records;
}

void AppendVerdict(const std::string& path, const VerdictRecord& record) {
  std::ofstream out(path, std::ios::app);
  out << VerdictRecordToJson(record).dump() << "\n";
  if (!out) throw Error(ErrorCode::kFileError, "cannot append to " + path);
}

// ---------------------------------------------------------------------------

namespace {

bool Contains(const std::string& haystack, std::initializer_list<std::string_view> needles) {
  for (std::string_view needle : needles) {
    if (haystack.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string CaptchaHeuristic(const std::string& text) {
  CaptchaVerdict v;
  auto set = [&](std::string_view key, bool value) {
    for (std::size_t i = 0; i < kCaptchaKeys.size(); ++i) {
      if (kCaptchaKeys[i] == key) v.values[i] = value;
    }
  };
  const bool cache = Contains(text, {"webcache", "cache:"});
  set("cache", cache);
  set("mobile", Contains(text, {"m.expedia", "mobile version"}));
  bool direct = false;
  for (const std::string& line : SplitLines(text)) {
    if (line.find("go to url") != std::string::npos &&
        line.find("expedia") != std::string::npos) {
      direct = true;
    }
  }
  set("direct_link", direct);
  set("google_search", !cache && Contains(text, {"search google"}));
  set("randomized_interaction", Contains(text, {"random"}));
  set("reloads", Contains(text, {"reload", "refresh"}));
  set("new_tab", Contains(text, {"open url in new tab", "new tab"}));
  set("switch_websites",
      Contains(text, {"kayak", "booking.com", "skyscanner", "tripadvisor", "hotels.com"}));
  set("internal_navigation", Contains(text, {"homepage", "home page"}));
  set("country_domain",
      Contains(text, {"expedia.co.uk", "expedia.ca", "expedia.de", "expedia.fr",
                      "expedia.com.au", "expedia.co.in", "expedia.es", "expedia.it",
                      "expedia.co.jp", "expedia.mx"}));
  set("text-only rendering", Contains(text, {"textise", "text-only", "r.jina.ai"}));
  set("public_proxy", Contains(text, {"allorigins", "proxy"}));
  set("internet_archive", Contains(text, {"web.archive.org", "wayback"}));
  set("google_travel_integration",
      Contains(text, {"google flight integration", "google travel integration"}));
  return v.ToJson().dump();
}

std::string BannerHeuristic(const std::string& text) {
  BannerVerdict v;
  v.banner_detected = Contains(text, {"cookie", "consent", "pop-up", "popup", "banner"});
  v.banner_closed =
      v.banner_detected && Contains(text, {"accept", "reject", "dismiss", "closed the"});
  v.task_successfully_completed = Contains(text, {"final success: true"});
  return v.ToJson().dump();
}

std::string PairwiseHeuristic(const std::string& text) {
  const std::size_t split = text.find("agent 2 trace:");
  if (split == std::string::npos) return R"({"choice": "Tie"})";
  const bool first = text.substr(0, split).find("final success: true") != std::string::npos;
  const bool second = text.substr(split).find("final success: true") != std::string::npos;
  if (first == second) return R"({"choice": "Tie"})";
  return first ? R"({"choice": "Agent 1"})" : R"({"choice": "Agent 2"})";
}

}  // namespace

std::string HeuristicJudgeClient::Complete(const llm::ChatRequest& request) {
  std::string system;
  std::string user;
  for (const llm::Message& message : request.messages) {
    if (message.role == llm::Message::Role::kSystem) system += message.text;
    if (message.role == llm::Message::Role::kUser) user = message.text;
  }
  const std::string text = ToLower(user);
  if (system.find("captcha avoidance") != std::string::npos) return CaptchaHeuristic(text);
  if (system.find("cookie banner") != std::string::npos) return BannerHeuristic(text);
  return PairwiseHeuristic(text);
}

}  // namespace arena::judge
