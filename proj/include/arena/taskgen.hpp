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

#ifndef ARENA_TASKGEN_HPP_
#define ARENA_TASKGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "arena/domain.hpp"
#include "arena/llm.hpp"

// Task-list construction for the targeted failure-mode studies: LLM
// generation with deduplication, template expansion, and trivia sampling.
namespace arena::taskgen {

// The ten bbc.com sections a generated task may name.
inline constexpr std::string_view kBbcSections[] = {
    "News", "Sport", "Business", "Innovation", "Culture",
    "Arts", "Travel", "Earth",   "Audio",      "Video"};

struct GenSpec {
  std::string template_id = "expedia";  // expedia | bbc | custom
  // Only for template_id == "custom".
  std::string custom_prompt;
  std::string custom_required_phrase;

  int target_count = 200;
  std::string model = "gpt-4o";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int stall_rounds = 3;  // consecutive rounds without a new task
};

void ValidateSpec(const GenSpec& spec);

// The phrase every task of the template must contain ("on Expedia",
// "on bbc.com", or the custom phrase).
std::string RequiredPhrase(const GenSpec& spec);

// Dedup key: lower-cased, whitespace runs collapsed, trimmed.
std::string DedupKey(std::string_view task);

// Extracts task strings from one generator reply: a JSON array of strings or
// of objects with a "task" field, or an object holding such an array
// (optionally inside a code fence). Anything unparseable as JSON falls back
// to one task per non-empty line, list markers and quotes stripped.
std::vector<std::string> ParseTaskList(std::string_view reply);

// Names of sections a task refers to ("... in the Culture section ...").
std::vector<std::string> MentionedSections(std::string_view task);

// Whether `task` is acceptable for `spec`: contains the required phrase
// (case-insensitive) and, for bbc, names only allowed sections.
bool AcceptTask(const GenSpec& spec, std::string_view task);

llm::ChatRequest BuildGenerationRequest(const GenSpec& spec, int round);

struct GenerationStats {
  int rounds = 0;
  int filtered = 0;    // rejected by AcceptTask
  int duplicates = 0;
};

// Prompts repeatedly until target_count unique tasks exist, then truncates
// to target_count (discovery order). Throws GeneratorUnavailable, and
// StallDetected after `stall_rounds` rounds that add nothing; the
// StallError carries the tasks gathered so far.
std::vector<TaskRecord> GenerateTasks(const GenSpec& spec, llm::ChatClient& generator,
                                      GenerationStats* stats = nullptr);

class StallError : public Error {
 public:
  StallError(std::string message, std::vector<TaskRecord> tasks)
      : Error(ErrorCode::kStallDetected, std::move(message)), tasks_(std::move(tasks)) {}
  const std::vector<TaskRecord>& tasks() const { return tasks_; }

 private:
  std::vector<TaskRecord> tasks_;
};

// ---------------------------------------------------------------------------
// Templates.

struct TaskTemplate {
  std::string name;  // becomes the task's source_tag
  std::string text;  // "{{slot}}" placeholders
};

using SlotValues = std::map<std::string, std::vector<std::string>>;

// Slot names in order of first appearance.
std::vector<std::string> TemplateSlots(std::string_view text);

// Enumerates every filling of every template, drops duplicate strings
// (DedupKey), shuffles with SeededShuffle(mt19937_64(seed)) and keeps the
// first `count`. Throws InvalidArgument for an uncovered slot and
// InsufficientCombinations when fewer than `count` distinct strings exist.
std::vector<TaskRecord> ExpandTemplates(const std::vector<TaskTemplate>& templates,
                                        const SlotValues& slot_values, int count,
                                        std::uint64_t seed);

// Three Expedia templates modelled on the example tasks of the generation
// prompt, with city and date slot values.
std::vector<TaskTemplate> ExpediaTemplates();
SlotValues ExpediaSlotValues();

// ---------------------------------------------------------------------------
// Trivia questions.

struct Question {
  std::string id;
  std::string text;
};

// Reads a question file: JSON Lines with a "question" (or "Question") field
// and optional "id"/"question_id"/"QuestionId", or a TriviaQA-style JSON
// document {"Data": [{"Question": ..., "QuestionId": ...}, ...]}.
// Throws FileError when the file is missing or malformed.
std::vector<Question> ReadQuestions(const std::filesystem::path& path);

// Uniform sample of n rows without replacement: the row indices are shuffled
// with SeededShuffle(mt19937_64(seed)) and the first n taken, in shuffled
// order. source_tag = `dataset` (default: the file stem). Throws
// NotEnoughRows when the file has fewer than n rows.
std::vector<TaskRecord> SampleQuestions(const std::filesystem::path& path, int n,
                                        std::uint64_t seed, std::string dataset = "");

// One TaskRecord JSON object per line, as accepted by batch submission.
std::string TasksToJsonl(const std::vector<TaskRecord>& tasks);
std::vector<TaskRecord> TasksFromJsonl(std::string_view text);

// Offline stand-in for the generation model. Each call returns a JSON array
// of `batch` tasks in the style of the prompt it receives (bbc.com when the
// prompt mentions it, Expedia otherwise), drawn from fixed city, date and
// section lists by an engine seeded with the request's seed. Repeats across
// calls are likely, as with a real model.
class OfflineTaskGeneratorClient : public llm::ChatClient {
 public:
  explicit OfflineTaskGeneratorClient(int batch = 90) : batch_(batch) {}
  std::string Complete(const llm::ChatRequest& request) override;

 private:
  int batch_;
};

inline constexpr std::string_view kSystemPrompt = "taskgen_system.v1";
inline constexpr std::string_view kExpediaPrompt = "taskgen_expedia.v1";
inline constexpr std::string_view kBbcPrompt = "taskgen_bbc.v1";

}  // namespace arena::taskgen

#endif  // ARENA_TASKGEN_HPP_
