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

#include "arena/domain.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "arena/error.hpp"

namespace arena {
namespace {

constexpr std::array<std::string_view, kActionCount> kVocabulary = {
    "Complete Task",
    "Search Google",
    "Go to URL",
    "Go Back",
    "Wait",
    "Wait for element to be visible",
    "Click element by Index",
    "Click element by Selector",
    "Click element by XPath",
    "Click element with Text",
    "Input Text",
    "Save as PDF",
    "Switch Tab",
    "Open URL in New Tab",
    "Close Tab",
    "Extract Page Content",
    "Save as HTML",
    "Scroll Down",
    "Scroll Up",
    "Send Special Keys",
    "Scroll to Text",
    "Get Dropdown Options",
    "Select Dropdown Option by Text",
    "Drag and Drop",
};

[[noreturn]] void Schema(const std::string& message) {
  throw Error(ErrorCode::kSchemaError, message);
}

const Json& Require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) Schema(where + ": missing \"" + key + "\"");
  return *it;
}

std::string RequireString(const Json& obj, const char* key,
                          const std::string& where) {
  const Json& value = Require(obj, key, where);
  if (!value.is_string()) Schema(where + ": \"" + key + "\" must be a string");
  return value.get<std::string>();
}

std::optional<std::string> OptionalString(const Json& obj, const char* key,
                                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) Schema(where + ": \"" + key + "\" must be a string");
  return it->get<std::string>();
}

void RejectUnknownKeys(const Json& obj, std::initializer_list<const char*> keys,
                       const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(),
                     [&](const char* k) { return key == k; })) {
      Schema(where + ": unexpected field \"" + key + "\"");
    }
  }
}

template <typename Enum, std::size_t N>
Enum ParseToken(std::string_view text,
                const std::array<std::pair<Enum, std::string_view>, N>& table,
                ErrorCode code, std::string_view what) {
  for (const auto& [value, token] : table) {
    if (token == text) return value;
  }
  throw Error(code, "invalid " + std::string(what) + " \"" + std::string(text) +
                        "\"");
}

template <typename Enum, std::size_t N>
std::string_view TokenOf(
    Enum value, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [v, token] : table) {
    if (v == value) return token;
  }
  return "?";
}

constexpr std::array<std::pair<TaskOrigin, std::string_view>, 3> kOrigins = {{
    {TaskOrigin::kUserSubmitted, "user_submitted"},
    {TaskOrigin::kGenerated, "generated"},
    {TaskOrigin::kTemplate, "template"},
}};
constexpr std::array<std::pair<GoalStatus, std::string_view>, 3> kGoal = {{
    {GoalStatus::kSuccess, "success"},
    {GoalStatus::kFailure, "failure"},
    {GoalStatus::kUnknown, "unknown"},
}};
constexpr std::array<std::pair<BattleStatus, std::string_view>, 3> kStatus = {{
    {BattleStatus::kRunning, "running"},
    {BattleStatus::kReady, "ready"},
    {BattleStatus::kVoted, "voted"},
}};
constexpr std::array<std::pair<Side, std::string_view>, 2> kSides = {{
    {Side::kLeft, "left"},
    {Side::kRight, "right"},
}};
constexpr std::array<std::pair<VoteChoice, std::string_view>, 3> kChoices = {{
    {VoteChoice::kLeft, "Left"},
    {VoteChoice::kRight, "Right"},
    {VoteChoice::kTie, "Tie"},
}};
constexpr std::array<std::pair<StepVerdict, std::string_view>, 2> kVerdicts = {{
    {StepVerdict::kCorrect, "correct"},
    {StepVerdict::kIncorrect, "incorrect"},
}};

AgentAction ActionFromJson(const Json& doc, const std::string& where) {
  if (!doc.is_object()) Schema(where + ": action must be an object");
  RejectUnknownKeys(doc, {"name", "params"}, where);
  const std::string name = RequireString(doc, "name", where);
  const auto parsed = ParseActionName(name);
  if (!parsed) {
    throw Error(ErrorCode::kUnknownAction,
                where + ": \"" + name + "\" is not a permitted action");
  }
  AgentAction action;
  action.name = *parsed;
  if (auto it = doc.find("params"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) Schema(where + ": params must be an object");
    action.params = *it;
  }
  return action;
}

AgentStep ParseStepAt(const Json& doc, const std::string& where) {
  if (!doc.is_object()) Schema(where + " must be an object");
  RejectUnknownKeys(doc,
                    {"index", "evaluation_previous_goal", "memory", "next_goal",
                     "actions", "url", "screenshot_ref"},
                    where);
  AgentStep step;
  const Json& index = Require(doc, "index", where);
  if (!index.is_number_integer()) Schema(where + ": index must be an integer");
  step.index = index.get<int>();
  step.prev_goal_eval.raw = RequireString(doc, "evaluation_previous_goal", where);
  step.prev_goal_eval.status = ClassifyGoalEvaluation(step.prev_goal_eval.raw);
  step.memory = RequireString(doc, "memory", where);
  step.next_goal = RequireString(doc, "next_goal", where);
  const Json& actions = Require(doc, "actions", where);
  if (!actions.is_array()) Schema(where + ": actions must be an array");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    step.actions.push_back(ActionFromJson(
        actions[i], where + ".actions[" + std::to_string(i) + "]"));
  }
  step.url = OptionalString(doc, "url", where).value_or("");
  step.screenshot_ref = OptionalString(doc, "screenshot_ref", where);
  return step;
}

void AppendIndented(std::ostringstream& out, std::string_view text) {
  for (char c : text) {
    out << c;
    if (c == '\n') out << "    ";
  }
}

}  // namespace

const std::array<std::string_view, kActionCount>& ActionVocabulary() {
  return kVocabulary;
}

std::string_view ActionNameString(ActionName name) {
  return kVocabulary[static_cast<std::size_t>(name)];
}

std::optional<ActionName> ParseActionName(std::string_view text) {
  for (std::size_t i = 0; i < kVocabulary.size(); ++i) {
    if (kVocabulary[i] == text) return static_cast<ActionName>(i);
  }
  return std::nullopt;
}

GoalStatus ClassifyGoalEvaluation(std::string_view raw) {
  // The leading word decides: "Success - ...", "Failed: ...", "Unknown".
  std::string head;
  for (char c : Trim(raw)) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    head.push_back(c);
  }
  head = ToLower(head);
  if (head == "success" || head == "successful") return GoalStatus::kSuccess;
  if (head == "failed" || head == "failure" || head == "fail") {
    return GoalStatus::kFailure;
  }
  return GoalStatus::kUnknown;
}

bool AgentTrace::ends_with_complete_task() const {
  return !steps.empty() && !steps.back().actions.empty() &&
         steps.back().actions.back().name == ActionName::kCompleteTask;
}

void ValidateTrace(const AgentTrace& trace) {
  if (trace.task_id.empty()) Schema("trace: task_id is empty");
  if (trace.model.empty()) Schema("trace: model is empty");
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const AgentStep& step = trace.steps[i];
    if (step.index != static_cast<int>(i)) {
      throw Error(ErrorCode::kOrderError,
                  "step at position " + std::to_string(i) + " has index " +
                      std::to_string(step.index));
    }
    const bool last = i + 1 == trace.steps.size();
    if (step.actions.empty() && !last) {
      Schema("step[" + std::to_string(i) + "]: non-terminal step has no actions");
    }
    for (std::size_t a = 0; a < step.actions.size(); ++a) {
      if (step.actions[a].name != ActionName::kCompleteTask) continue;
      if (!last || a + 1 != step.actions.size()) {
        throw Error(ErrorCode::kOrderError,
                    "Complete Task must be the final action of the trace");
      }
      const auto it = step.actions[a].params.find("success");
      if (it != step.actions[a].params.end() && !it->is_boolean()) {
        Schema("Complete Task: success must be a boolean");
      }
    }
  }
  std::optional<bool> expected;
  if (trace.ends_with_complete_task()) {
    const Json& params = trace.steps.back().actions.back().params;
    if (auto it = params.find("success"); it != params.end()) {
      expected = it->get<bool>();
    }
  }
  if (trace.final_success != expected) {
    Schema("trace: final_success disagrees with the Complete Task action");
  }
}

AgentTrace TraceFromJson(const Json& doc) {
  if (!doc.is_object()) Schema("trace must be an object");
  RejectUnknownKeys(doc,
                    {"schema", "task_id", "model", "steps", "gif_ref",
                     "wall_time"},
                    "trace");
  if (auto it = doc.find("schema"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != kTraceSchemaVersion) {
      Schema("trace: unsupported schema " + it->dump());
    }
  }
  AgentTrace trace;
  trace.task_id = RequireString(doc, "task_id", "trace");
  trace.model = ModelId(RequireString(doc, "model", "trace"));
  const Json& steps = Require(doc, "steps", "trace");
  if (!steps.is_array()) Schema("trace: steps must be an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    trace.steps.push_back(ParseStepAt(steps[i], "step[" + std::to_string(i) + "]"));
  }
  trace.gif_ref = OptionalString(doc, "gif_ref", "trace");
  if (auto it = doc.find("wall_time"); it != doc.end()) {
    if (!it->is_number()) Schema("trace: wall_time must be a number");
    trace.wall_time = it->get<double>();
  }
  RefreshFinalSuccess(trace);
  ValidateTrace(trace);
  return trace;
}

AgentStep StepFromJson(const Json& doc) { return ParseStepAt(doc, "step"); }

Json StepToJson(const AgentStep& step) {
  Json actions = Json::array();
  for (const AgentAction& action : step.actions) {
    actions.push_back(
        {{"name", ActionNameString(action.name)}, {"params", action.params}});
  }
  Json s = {{"index", step.index},
            {"evaluation_previous_goal", step.prev_goal_eval.raw},
            {"memory", step.memory},
            {"next_goal", step.next_goal},
            {"actions", std::move(actions)},
            {"url", step.url}};
  if (step.screenshot_ref) s["screenshot_ref"] = *step.screenshot_ref;
  return s;
}

void RefreshFinalSuccess(AgentTrace& trace) {
  trace.final_success.reset();
  if (!trace.ends_with_complete_task()) return;
  const Json& params = trace.steps.back().actions.back().params;
  if (auto it = params.find("success"); it != params.end() && it->is_boolean()) {
    trace.final_success = it->get<bool>();
  }
}

AgentTrace ParseTrace(std::string_view raw) {
  Json doc;
  try {
    doc = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    Schema(std::string("trace is not well-formed: ") + e.what());
  }
  return TraceFromJson(doc);
}

Json TraceToJson(const AgentTrace& trace) {
  Json steps = Json::array();
  for (const AgentStep& step : trace.steps) steps.push_back(StepToJson(step));
  Json doc = {{"schema", kTraceSchemaVersion},
              {"task_id", trace.task_id},
              {"model", trace.model.name},
              {"steps", std::move(steps)},
              {"wall_time", trace.wall_time}};
  if (trace.gif_ref) doc["gif_ref"] = *trace.gif_ref;
  return doc;
}

std::string SerializeTrace(const AgentTrace& trace) {
  return TraceToJson(trace).dump();
}

std::string RenderTranscript(const AgentTrace& trace) {
  std::ostringstream out;
  out << "Task ID: " << trace.task_id << "\n";
  out << "Steps: " << trace.steps.size() << "\n";
  out << "Final success: ";
  if (trace.final_success) {
    out << (*trace.final_success ? "true" : "false");
  } else {
    out << "unset";
  }
  out << "\n";
  for (const AgentStep& step : trace.steps) {
    out << "\nStep " << step.index << "\n";
    out << "  URL: " << step.url << "\n";
    out << "  Goal: ";
    AppendIndented(out, step.next_goal);
    out << "\n  Evaluation of previous goal [" << ToString(step.prev_goal_eval.status)
        << "]: ";
    AppendIndented(out, step.prev_goal_eval.raw);
    out << "\n  Memory: ";
    AppendIndented(out, step.memory);
    out << "\n  Actions:\n";
    for (const AgentAction& action : step.actions) {
      out << "    - " << ActionNameString(action.name);
      if (!action.params.empty()) out << " " << action.params.dump();
      out << "\n";
    }
  }
  return out.str();
}

std::string_view ToString(TaskOrigin origin) { return TokenOf(origin, kOrigins); }
std::string_view ToString(GoalStatus status) { return TokenOf(status, kGoal); }
std::string_view ToString(BattleStatus status) { return TokenOf(status, kStatus); }
std::string_view ToString(Side side) { return TokenOf(side, kSides); }
std::string_view ToString(VoteChoice choice) { return TokenOf(choice, kChoices); }
std::string_view ToString(StepVerdict verdict) { return TokenOf(verdict, kVerdicts); }

TaskOrigin ParseTaskOrigin(std::string_view text) {
  return ParseToken(text, kOrigins, ErrorCode::kSchemaError, "task origin");
}
BattleStatus ParseBattleStatus(std::string_view text) {
  return ParseToken(text, kStatus, ErrorCode::kSchemaError, "battle status");
}
Side ParseSide(std::string_view text) {
  return ParseToken(text, kSides, ErrorCode::kValidationError, "side");
}
VoteChoice ParseVoteChoice(std::string_view text) {
  return ParseToken(text, kChoices, ErrorCode::kInvalidChoice, "vote choice");
}
StepVerdict ParseStepVerdict(std::string_view text) {
  return ParseToken(text, kVerdicts, ErrorCode::kValidationError, "verdict");
}

void to_json(Json& j, const ModelId& m) { j = m.name; }
void from_json(const Json& j, ModelId& m) {
  if (!j.is_string() || j.get<std::string>().empty()) {
    throw Error(ErrorCode::kSchemaError, "model id must be a non-empty string");
  }
  m.name = j.get<std::string>();
}

void to_json(Json& j, const TaskRecord& t) {
  j = {{"id", t.id},
       {"prompt", t.prompt},
       {"origin", ToString(t.origin)},
       {"source_tag", t.source_tag},
       {"created_at", t.created_at}};
}

void from_json(const Json& j, TaskRecord& t) {
  if (!j.is_object()) Schema("task record must be an object");
  t.id = RequireString(j, "id", "task");
  t.prompt = RequireString(j, "prompt", "task");
  t.origin = ParseTaskOrigin(RequireString(j, "origin", "task"));
  t.source_tag = OptionalString(j, "source_tag", "task").value_or("");
  t.created_at = j.value("created_at", Timestamp{0});
  if (t.id.empty()) Schema("task: id is empty");
  if (Trim(t.prompt).empty()) {
    throw Error(ErrorCode::kValidationError, "task prompt is empty");
  }
}

void to_json(Json& j, const Vote& v) {
  j = {{"battle_id", v.battle_id},
       {"choice", ToString(v.choice)},
       {"voter_id", v.voter_id},
       {"cast_at", v.cast_at}};
}

void from_json(const Json& j, Vote& v) {
  if (!j.is_object()) Schema("vote must be an object");
  v.battle_id = RequireString(j, "battle_id", "vote");
  v.choice = ParseVoteChoice(RequireString(j, "choice", "vote"));
  v.voter_id = RequireString(j, "voter_id", "vote");
  v.cast_at = j.value("cast_at", Timestamp{0});
}

void to_json(Json& j, const StepAnnotation& a) {
  j = {{"battle_id", a.battle_id},
       {"side", ToString(a.side)},
       {"step_index", a.step_index},
       {"verdict", ToString(a.verdict)},
       {"reason", a.reason}};
}

void from_json(const Json& j, StepAnnotation& a) {
  if (!j.is_object()) Schema("annotation must be an object");
  a.battle_id = j.value("battle_id", std::string());
  a.side = ParseSide(RequireString(j, "side", "annotation"));
  const Json& index = Require(j, "step_index", "annotation");
  if (!index.is_number_integer()) Schema("annotation: step_index must be an integer");
  a.step_index = index.get<int>();
  a.verdict = ParseStepVerdict(RequireString(j, "verdict", "annotation"));
  a.reason = OptionalString(j, "reason", "annotation").value_or("");
}

void ValidateAnnotation(const StepAnnotation& annotation) {
  if (annotation.verdict == StepVerdict::kIncorrect &&
      Trim(annotation.reason).empty()) {
    throw Error(ErrorCode::kMissingReason,
                "step " + std::to_string(annotation.step_index) +
                    " marked incorrect without a reason");
  }
}

}  // namespace arena
