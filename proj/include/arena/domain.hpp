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

#ifndef ARENA_DOMAIN_HPP_
#define ARENA_DOMAIN_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/util.hpp"
#include "json.hpp"

namespace arena {

using Json = nlohmann::json;

inline constexpr std::string_view kTraceSchemaVersion = "arena.trace/v1";

// Opaque key for an LLM backend in the roster.
struct ModelId {
  std::string name;

  ModelId() = default;
  explicit ModelId(std::string n) : name(std::move(n)) {}

  bool empty() const { return name.empty(); }
  auto operator<=>(const ModelId&) const = default;
};

enum class TaskOrigin { kUserSubmitted, kGenerated, kTemplate };

struct TaskRecord {
  std::string id;
  std::string prompt;
  TaskOrigin origin = TaskOrigin::kUserSubmitted;
  std::string source_tag;
  Timestamp created_at = 0;

  bool operator==(const TaskRecord&) const = default;
};

// The 24 actions an agent may emit. Declaration order is the canonical
// vocabulary order.
enum class ActionName : std::uint8_t {
  kCompleteTask,
  kSearchGoogle,
  kGoToUrl,
  kGoBack,
  kWait,
  kWaitForElementVisible,
  kClickElementByIndex,
  kClickElementBySelector,
  kClickElementByXPath,
  kClickElementWithText,
  kInputText,
  kSaveAsPdf,
  kSwitchTab,
  kOpenUrlInNewTab,
  kCloseTab,
  kExtractPageContent,
  kSaveAsHtml,
  kScrollDown,
  kScrollUp,
  kSendSpecialKeys,
  kScrollToText,
  kGetDropdownOptions,
  kSelectDropdownOptionByText,
  kDragAndDrop,
};

inline constexpr std::size_t kActionCount = 24;

// Display names, indexed by ActionName.
const std::array<std::string_view, kActionCount>& ActionVocabulary();
std::string_view ActionNameString(ActionName name);
std::optional<ActionName> ParseActionName(std::string_view text);

struct AgentAction {
  ActionName name = ActionName::kWait;
  Json params = Json::object();

  bool operator==(const AgentAction&) const = default;
};

enum class GoalStatus { kSuccess, kFailure, kUnknown };

// Self-evaluation of the previous goal: the model's raw text plus the status
// derived from its leading keyword.
struct GoalEvaluation {
  GoalStatus status = GoalStatus::kUnknown;
  std::string raw;

  bool operator==(const GoalEvaluation&) const = default;
};

GoalStatus ClassifyGoalEvaluation(std::string_view raw);

struct AgentStep {
  int index = 0;
  GoalEvaluation prev_goal_eval;
  std::string memory;
  std::string next_goal;
  std::vector<AgentAction> actions;
  std::string url;
  std::optional<std::string> screenshot_ref;

  bool operator==(const AgentStep&) const = default;
};

struct AgentTrace {
  std::string task_id;
  ModelId model;
  std::vector<AgentStep> steps;
  // Set only when the trace ends in a Complete Task action carrying a flag.
  std::optional<bool> final_success;
  std::optional<std::string> gif_ref;
  double wall_time = 0.0;

  bool operator==(const AgentTrace&) const = default;

  bool ends_with_complete_task() const;
};

// Checks every trace invariant; throws Error on the first violation.
void ValidateTrace(const AgentTrace& trace);

// One step object of the trace schema. Throws SchemaError / UnknownAction.
AgentStep StepFromJson(const Json& doc);
Json StepToJson(const AgentStep& step);

// Recomputes final_success from the trailing Complete Task action.
void RefreshFinalSuccess(AgentTrace& trace);

AgentTrace ParseTrace(std::string_view raw);
AgentTrace TraceFromJson(const Json& doc);
Json TraceToJson(const AgentTrace& trace);
// Single-line document; one trace per line when batched.
std::string SerializeTrace(const AgentTrace& trace);

// Canonical text handed to judges and the miner. Model identity is omitted so
// the text can be shown blind.
std::string RenderTranscript(const AgentTrace& trace);

enum class BattleStatus { kRunning, kReady, kVoted };
enum class Side { kLeft, kRight };

struct Battle {
  std::string id;
  TaskRecord task;
  ModelId left_model;
  ModelId right_model;
  std::optional<AgentTrace> left;
  std::optional<AgentTrace> right;
  BattleStatus status = BattleStatus::kRunning;
};

enum class VoteChoice { kLeft, kRight, kTie };

struct Vote {
  std::string battle_id;
  VoteChoice choice = VoteChoice::kTie;
  std::string voter_id;
  Timestamp cast_at = 0;

  bool operator==(const Vote&) const = default;
};

enum class StepVerdict { kCorrect, kIncorrect };

struct StepAnnotation {
  std::string battle_id;
  Side side = Side::kLeft;
  int step_index = 0;
  StepVerdict verdict = StepVerdict::kCorrect;
  std::string reason;

  bool operator==(const StepAnnotation&) const = default;
};

// Enum <-> token conversions. Parsers throw Error on unknown tokens.
std::string_view ToString(TaskOrigin origin);
std::string_view ToString(GoalStatus status);
std::string_view ToString(BattleStatus status);
std::string_view ToString(Side side);
std::string_view ToString(VoteChoice choice);
std::string_view ToString(StepVerdict verdict);
TaskOrigin ParseTaskOrigin(std::string_view text);
BattleStatus ParseBattleStatus(std::string_view text);
Side ParseSide(std::string_view text);
// Accepts exactly "Left", "Right" and "Tie"; anything else is InvalidChoice.
VoteChoice ParseVoteChoice(std::string_view text);
StepVerdict ParseStepVerdict(std::string_view text);

void to_json(Json& j, const ModelId& m);
void from_json(const Json& j, ModelId& m);
void to_json(Json& j, const TaskRecord& t);
void from_json(const Json& j, TaskRecord& t);
void to_json(Json& j, const Vote& v);
void from_json(const Json& j, Vote& v);
void to_json(Json& j, const StepAnnotation& a);
void from_json(const Json& j, StepAnnotation& a);
// Throws MissingReason when an incorrect verdict has no reason.
void ValidateAnnotation(const StepAnnotation& annotation);

}  // namespace arena

#endif  // ARENA_DOMAIN_HPP_
