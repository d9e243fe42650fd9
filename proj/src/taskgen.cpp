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

#include "arena/taskgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <regex>
#include <set>

#include "arena/util.hpp"

namespace arena::taskgen {
namespace {

std::string Numbered(std::string_view prefix, std::size_t n) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "-%04zu", n);
  return std::string(prefix) + buffer;
}

std::string StripMarkerAndQuotes(std::string line) {
  line = Trim(line);
  std::size_t i = 0;
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    i = 1;
  } else {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      ++i;
    } else {
      i = 0;
    }
  }
  line = Trim(std::string_view(line).substr(i));
  if (!line.empty() && line.back() == ',') line.pop_back();
  if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
    line = line.substr(1, line.size() - 2);
  }
  return Trim(line);
}

void CollectTasks(const Json& value, std::vector<std::string>& out) {
  if (value.is_string()) {
    out.push_back(Trim(value.get<std::string>()));
  } else if (value.is_array()) {
    for (const Json& item : value) CollectTasks(item, out);
  } else if (value.is_object()) {
    for (const char* key : {"task", "prompt", "description"}) {
      auto it = value.find(key);
      if (it != value.end() && it->is_string()) {
        out.push_back(Trim(it->get<std::string>()));
        return;
      }
    }
    for (const auto& item : value.items()) {
      if (item.value().is_array()) CollectTasks(item.value(), out);
    }
  }
}

bool ContainsIgnoreCase(std::string_view haystack, std::string_view needle) {
  return ToLower(haystack).find(ToLower(needle)) != std::string::npos;
}

}  // namespace

void ValidateSpec(const GenSpec& spec) {
  if (spec.target_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "target_count must be >= 1");
  }
  if (spec.stall_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "stall_rounds must be >= 1");
  }
  if (spec.template_id == "custom") {
    if (Trim(spec.custom_prompt).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "custom template needs a prompt");
    }
  } else if (spec.template_id != "expedia" && spec.template_id != "bbc") {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown template \"" + spec.template_id + "\" (expedia, bbc, custom)");
  }
}

std::string RequiredPhrase(const GenSpec& spec) {
  if (spec.template_id == "expedia") return "on Expedia";
  if (spec.template_id == "bbc") return "on bbc.com";
  return spec.custom_required_phrase;
}

std::string DedupKey(std::string_view task) { return NormalizeForDedup(Trim(task)); }

std::vector<std::string> ParseTaskList(std::string_view reply) {
  std::vector<std::string> tasks;
  const std::string body = llm::StripCodeFence(reply);
  try {
    CollectTasks(Json::parse(body), tasks);
  } catch (const Json::exception&) {
    tasks.clear();
    for (const std::string& line : SplitLines(body)) {
      std::string task = StripMarkerAndQuotes(line);
      if (task == "[" || task == "]" || task == "{" || task == "}") continue;
      tasks.push_back(std::move(task));
    }
  }
  std::vector<std::string> out;
  for (std::string& task : tasks) {
    if (!task.empty()) out.push_back(std::move(task));
  }
  return out;
}

std::vector<std::string> MentionedSections(std::string_view task) {
  static const std::regex kSection(R"(\b([A-Za-z]+)\s+sections?\b)", std::regex::icase);
  std::vector<std::string> sections;
  const std::string text(task);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kSection);
       it != std::sregex_iterator(); ++it) {
    const std::string word = (*it)[1].str();
    const std::string lower = ToLower(word);
    if (lower == "the" || lower == "a" || lower == "this" || lower == "that" ||
        lower == "each" || lower == "every" || lower == "which") {
      continue;
    }
    sections.push_back(word);
  }
  return sections;
}

bool AcceptTask(const GenSpec& spec, std::string_view task) {
  const std::string phrase = RequiredPhrase(spec);
  if (!phrase.empty() && !ContainsIgnoreCase(task, phrase)) return false;
  if (spec.template_id == "bbc") {
    for (const std::string& section : MentionedSections(task)) {
      bool allowed = false;
      for (std::string_view name : kBbcSections) {
        allowed |= ToLower(name) == ToLower(section);
      }
      if (!allowed) return false;
    }
  }
  return true;
}

llm::ChatRequest BuildGenerationRequest(const GenSpec& spec, int round) {
  llm::ChatRequest request;
  request.model = spec.model;
  request.temperature = spec.temperature;
  request.seed = spec.seed + static_cast<std::uint64_t>(round);
  std::string prompt;
  if (spec.template_id == "expedia") {
    prompt = PromptTemplate(kExpediaPrompt);
  } else if (spec.template_id == "bbc") {
    prompt = PromptTemplate(kBbcPrompt);
  } else {
    prompt = spec.custom_prompt;
  }
  request.messages.push_back(
      {llm::Message::Role::kSystem, std::string(PromptTemplate(kSystemPrompt)), {}});
  request.messages.push_back({llm::Message::Role::kUser, prompt, {}});
  return request;
}

std::vector<TaskRecord> GenerateTasks(const GenSpec& spec, llm::ChatClient& generator,
                                      GenerationStats* stats) {
  ValidateSpec(spec);
  GenerationStats local;
  GenerationStats& s = stats ? *stats : local;
  s = {};
  std::vector<TaskRecord> tasks;
  std::set<std::string> seen;
  int idle_rounds = 0;
  while (static_cast<int>(tasks.size()) < spec.target_count) {
    std::string reply;
    try {
      reply = generator.Complete(BuildGenerationRequest(spec, s.rounds));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kClientUnavailable) {
        throw Error(ErrorCode::kGeneratorUnavailable, e.what());
      }
      throw;
    }
    ++s.rounds;
    bool added = false;
    for (const std::string& text : ParseTaskList(reply)) {
      if (!AcceptTask(spec, text)) {
        ++s.filtered;
        continue;
      }
      if (!seen.insert(DedupKey(text)).second) {
        ++s.duplicates;
        continue;
      }
      TaskRecord task;
      task.id = Numbered(spec.template_id, tasks.size() + 1);
      task.prompt = text;
      task.origin = TaskOrigin::kGenerated;
      task.source_tag = spec.template_id;
      tasks.push_back(std::move(task));
      added = true;
    }
    idle_rounds = added ? 0 : idle_rounds + 1;
    if (idle_rounds >= spec.stall_rounds &&
        static_cast<int>(tasks.size()) < spec.target_count) {
      const std::size_t have = tasks.size();
      throw StallError(std::to_string(spec.stall_rounds) +
                           " consecutive rounds added no new task (" +
                           std::to_string(have) + " of " +
                           std::to_string(spec.target_count) + " collected)",
                       std::move(tasks));
    }
  }
  tasks.resize(static_cast<std::size_t>(spec.target_count));
  return tasks;
}

// ---------------------------------------------------------------------------
// Templates.

namespace {
const std::regex kSlotPattern(R"(\{\{\s*([A-Za-z0-9_]+)\s*\}\})");
}  // namespace

std::vector<std::string> TemplateSlots(std::string_view text) {
  std::vector<std::string> slots;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kSlotPattern);
       it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[1].str();
    if (std::find(slots.begin(), slots.end(), name) == slots.end()) slots.push_back(name);
  }
  return slots;
}

std::vector<TaskRecord> ExpandTemplates(const std::vector<TaskTemplate>& templates,
                                        const SlotValues& slot_values, int count,
                                        std::uint64_t seed) {
  if (count < 0) throw Error(ErrorCode::kInvalidArgument, "count must be >= 0");
  constexpr std::size_t kMaxCombinations = 2'000'000;
  struct Candidate {
    std::string text;
    std::string source;
  };
  std::vector<Candidate> candidates;
  std::set<std::string> seen;
  for (const TaskTemplate& tmpl : templates) {
    const std::vector<std::string> slots = TemplateSlots(tmpl.text);
    // RenderTemplate wants "{{name}}" exactly; tolerate inner spaces.
    const std::string normalized = std::regex_replace(tmpl.text, kSlotPattern, "{{$1}}");
    std::vector<const std::vector<std::string>*> values;
    std::size_t combinations = 1;
    for (const std::string& slot : slots) {
      auto it = slot_values.find(slot);
      if (it == slot_values.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "template \"" + tmpl.name + "\" uses slot \"" + slot +
                        "\" with no values");
      }
      values.push_back(&it->second);
      combinations *= it->second.size();
      if (combinations > kMaxCombinations) {
        throw Error(ErrorCode::kInvalidArgument,
                    "template \"" + tmpl.name + "\" has too many combinations to enumerate");
      }
    }
    // Mixed-radix counter over the slot value lists.
    std::vector<std::size_t> digit(slots.size(), 0);
    for (std::size_t c = 0; c < combinations; ++c) {
      std::map<std::string, std::string> filling;
      for (std::size_t s = 0; s < slots.size(); ++s) filling[slots[s]] = (*values[s])[digit[s]];
      std::string text = RenderTemplate(normalized, filling);
      if (seen.insert(DedupKey(text)).second) candidates.push_back({std::move(text), tmpl.name});
      for (std::size_t s = slots.size(); s-- > 0;) {
        if (++digit[s] < values[s]->size()) break;
        digit[s] = 0;
      }
    }
  }
  if (candidates.size() < static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::kInsufficientCombinations,
                "requested " + std::to_string(count) + " tasks but only " +
                    std::to_string(candidates.size()) + " distinct fillings exist");
  }
  std::mt19937_64 rng(seed);
  SeededShuffle(candidates, rng);
  std::vector<TaskRecord> tasks;
  for (int i = 0; i < count; ++i) {
    TaskRecord task;
    task.id = Numbered("template", static_cast<std::size_t>(i) + 1);
    task.prompt = candidates[static_cast<std::size_t>(i)].text;
    task.origin = TaskOrigin::kTemplate;
    task.source_tag = candidates[static_cast<std::size_t>(i)].source;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<TaskTemplate> ExpediaTemplates() {
  return {
      {"expedia-activities", "Find a list of activities on Expedia to do in {{city}} on {{date}}."},
      {"expedia-hotel",
       "Find the cheapest hotel in {{city}} on Expedia from {{date_range}}."},
      {"expedia-flights",
       "Find the cheapest round-trip flights between {{origin}} and {{city}} on Expedia "
       "from {{date_range}}."},
  };
}

SlotValues ExpediaSlotValues() {
  const std::vector<std::string> cities = {"Chicago", "Houston", "Los Angeles", "Seattle",
                                           "Miami",   "Denver",  "Boston",      "Atlanta",
                                           "Phoenix", "San Diego"};
  return {
      {"city", cities},
      {"origin", {"New York", "San Francisco", "Dallas", "Washington"}},
      {"date", {"December 3", "January 14", "March 22", "May 9", "July 18", "October 5"}},
      {"date_range",
       {"August 8-12", "November 10-15", "February 2-6", "April 17-21", "June 3-7",
        "September 12-16"}},
  };
}

// ---------------------------------------------------------------------------
// Trivia questions.

std::vector<Question> ReadQuestions(const std::filesystem::path& path) {
  std::string content;
  try {
    content = ReadFile(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFileError, e.what());
  }
  auto question_from = [&](const Json& row, std::size_t index) {
    Question q;
    for (const char* key : {"question", "Question"}) {
      if (row.contains(key) && row[key].is_string()) q.text = Trim(row[key].get<std::string>());
    }
    if (q.text.empty()) {
      throw Error(ErrorCode::kFileError, path.string() + ": record " +
                                             std::to_string(index + 1) +
                                             " has no question text");
    }
    for (const char* key : {"id", "question_id", "QuestionId"}) {
      if (row.contains(key) && row[key].is_string()) q.id = row[key].get<std::string>();
    }
    if (q.id.empty()) q.id = std::to_string(index + 1);
    return q;
  };
  std::vector<Question> questions;
  const std::string trimmed = Trim(content);
  if (!trimmed.empty() && trimmed.front() == '{') {
    // A whole-file JSON document (TriviaQA layout) or JSON Lines whose first
    // record starts the file; try the document reading first.
    try {
      const Json doc = Json::parse(trimmed);
      if (doc.contains("Data")) {
        if (!doc["Data"].is_array()) {
          throw Error(ErrorCode::kFileError, path.string() + ": \"Data\" is not an array");
        }
        for (std::size_t i = 0; i < doc["Data"].size(); ++i) {
          questions.push_back(question_from(doc["Data"][i], i));
        }
        return questions;
      }
    } catch (const Json::exception&) {
      // Not a single document; fall through to JSON Lines.
    }
  }
  std::size_t line_number = 0;
  for (const std::string& line : SplitLines(content)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kFileError, path.string() + ":" + std::to_string(line_number) +
                                             ": " + e.what());
    }
    if (!row.is_object()) {
      throw Error(ErrorCode::kFileError,
                  path.string() + ":" + std::to_string(line_number) + ": not an object");
    }
    questions.push_back(question_from(row, questions.size()));
  }
  return questions;
}

std::vector<TaskRecord> SampleQuestions(const std::filesystem::path& path, int n,
                                        std::uint64_t seed, std::string dataset) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 0");
  const std::vector<Question> questions = ReadQuestions(path);
  if (questions.size() < static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kNotEnoughRows,
                "asked for " + std::to_string(n) + " questions but " + path.string() +
                    " has " + std::to_string(questions.size()));
  }
  if (dataset.empty()) dataset = path.stem().string();
  std::vector<std::size_t> order(questions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  SeededShuffle(order, rng);
  std::vector<TaskRecord> tasks;
  for (int i = 0; i < n; ++i) {
    const Question& q = questions[order[static_cast<std::size_t>(i)]];
    TaskRecord task;
    task.id = dataset + ":" + q.id;
    task.prompt = q.text;
    task.origin = TaskOrigin::kGenerated;
    task.source_tag = dataset;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::string OfflineTaskGeneratorClient::Complete(const llm::ChatRequest& request) {
  std::string prompt;
  for (const llm::Message& message : request.messages) prompt += message.text;
  std::mt19937_64 rng(request.seed.value_or(0));
  auto pick = [&rng](const auto& list) -> std::string {
    return std::string(list[UniformBelow(rng, std::size(list))]);
  };
  static constexpr std::string_view kCities[] = {
      "Chicago", "Houston", "Los Angeles", "Seattle", "Miami", "Denver", "Boston",
      "Atlanta", "Phoenix", "San Diego", "Portland", "Nashville", "Austin", "Orlando"};
  static constexpr std::string_view kMonths[] = {
      "January", "February", "March", "April", "May", "June", "July", "August",
      "September", "October", "November", "December"};
  static constexpr std::string_view kWhat[] = {"headlines", "top stories", "most read articles",
                                               "latest reports"};
  const bool bbc = prompt.find("bbc.com") != std::string::npos;
  Json tasks = Json::array();
  for (int i = 0; i < batch_; ++i) {
    std::string task;
    if (bbc) {
      const auto days = 1 + UniformBelow(rng, 7);
      const std::string section = pick(kBbcSections);
      switch (UniformBelow(rng, 3)) {
        case 0:
          task = "What is the top story today in the " + section + " section on bbc.com?";
          break;
        case 1:
          task = "List all the " + pick(kWhat) + " from " + std::to_string(days) +
                 " days ago in the " + section + " section on bbc.com.";
          break;
        default:
          task = "Find the top " + std::to_string(3 + UniformBelow(rng, 8)) + " " +
                 pick(kWhat) + " in the " + section + " section on bbc.com.";
      }
    } else {
      const std::string month = pick(kMonths);
      const auto day = 1 + UniformBelow(rng, 24);
      const std::string span =
          month + " " + std::to_string(day) + "-" + std::to_string(day + 2 + UniformBelow(rng, 4));
      switch (UniformBelow(rng, 3)) {
        case 0:
          task = "Find a list of activities on Expedia to do in " + pick(kCities) + " on " +
                 month + " " + std::to_string(day) + ".";
          break;
        case 1:
          task = "Find the cheapest hotel in " + pick(kCities) + " on Expedia from " + span + ".";
          break;
        default: {
          const std::string from = pick(kCities);
          std::string to = pick(kCities);
          if (to == from) to = "New York";
          task = "Find the cheapest round-trip flights between " + from + " and " + to +
                 " on Expedia from " + span + ".";
        }
      }
    }
    tasks.push_back(std::move(task));
  }
  return tasks.dump(2);
}

std::string TasksToJsonl(const std::vector<TaskRecord>& tasks) {
  std::string out;
  for (const TaskRecord& task : tasks) out += Json(task).dump() + "\n";
  return out;
}

std::vector<TaskRecord> TasksFromJsonl(std::string_view text) {
  std::vector<TaskRecord> tasks;
  std::size_t line_number = 0;
  for (const std::string& line : SplitLines(text)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    try {
      tasks.push_back(Json::parse(line).get<TaskRecord>());
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchemaError,
                  "task line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return tasks;
}

}  // namespace arena::taskgen
