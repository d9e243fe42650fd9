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

#include "arena/error.hpp"
#include "arena/taskgen.hpp"
#include "arena/util.hpp"
#include "cli.hpp"

namespace arena::cli {
namespace {

struct GenTasksOptions {
  std::string template_id = "expedia";
  int count = 200;
  std::string client = "offline";
  std::string model;
  double temperature = -1.0;
  int stall_rounds = 0;
  std::string prompt_file;
  std::string required_phrase;
  std::string questions_path;
  std::string dataset;
  std::string out;
};

std::uint64_t ResolveSeed(const Globals& globals) {
  if (globals.seed_given) return globals.seed;
  return LoadConfig(globals).value("seed", std::uint64_t{0});
}

// Status goes to stderr so stdout can carry the task list.
void Report(const Json& summary) { std::cerr << summary.dump() << "\n"; }

int Generate(const GenTasksOptions& options, const Globals& globals) {
  const Json section = ConfigSection(globals, "taskgen");
  taskgen::GenSpec spec;
  spec.template_id = options.template_id;
  spec.target_count = options.count;
  spec.seed = ResolveSeed(globals);
  spec.model = section.value("model", spec.model);
  spec.temperature = section.value("temperature", spec.temperature);
  spec.stall_rounds = section.value("stall_rounds", spec.stall_rounds);
  if (!options.model.empty()) spec.model = options.model;
  if (options.temperature >= 0.0) spec.temperature = options.temperature;
  if (options.stall_rounds > 0) spec.stall_rounds = options.stall_rounds;
  if (spec.template_id == "custom") {
    if (options.prompt_file.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--template custom needs --prompt-file");
    }
    spec.custom_prompt = ReadFile(options.prompt_file);
    spec.custom_required_phrase = options.required_phrase;
  }

  std::unique_ptr<llm::ChatClient> client;
  if (options.client == "offline") {
    client = std::make_unique<taskgen::OfflineTaskGeneratorClient>();
  } else if (options.client == "openai") {
    client = llm::OpenAiChatClient::FromEnv();
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--client must be offline or openai");
  }

  taskgen::GenerationStats stats;
  try {
    const auto tasks = taskgen::GenerateTasks(spec, *client, &stats);
    Emit(options.out, taskgen::TasksToJsonl(tasks));
    Report({{"tasks", tasks.size()},
            {"rounds", stats.rounds},
            {"filtered", stats.filtered},
            {"duplicates", stats.duplicates}});
    return 0;
  } catch (const taskgen::StallError& e) {
    // Keep what was gathered; the caller decides whether it is enough.
    Emit(options.out, taskgen::TasksToJsonl(e.tasks()));
    Report({{"tasks", e.tasks().size()},
            {"rounds", stats.rounds},
            {"filtered", stats.filtered},
            {"duplicates", stats.duplicates},
            {"error", std::string(ErrorCodeName(e.code()))},
            {"message", e.what()}});
    return 1;
  }
}

int RunGenTasks(const GenTasksOptions& options, const Globals& globals) {
  if (options.count <= 0) throw Error(ErrorCode::kInvalidArgument, "--count must be positive");
  if (options.template_id == "expedia" || options.template_id == "bbc" ||
      options.template_id == "custom") {
    return Generate(options, globals);
  }
  std::vector<TaskRecord> tasks;
  if (options.template_id == "expedia-templates") {
    tasks = taskgen::ExpandTemplates(taskgen::ExpediaTemplates(), taskgen::ExpediaSlotValues(),
                                     options.count, ResolveSeed(globals));
  } else if (options.template_id == "questions") {
    if (options.questions_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--template questions needs --questions");
    }
    tasks = taskgen::SampleQuestions(options.questions_path, options.count, ResolveSeed(globals),
                                     options.dataset);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown --template \"" + options.template_id +
                    "\" (expedia, bbc, custom, expedia-templates, questions)");
  }
  Emit(options.out, taskgen::TasksToJsonl(tasks));
  Report({{"tasks", tasks.size()}});
  return 0;
}

}  // namespace

Command AddGenTasks(CLI::App& app, const Globals& globals) {
  auto options = std::make_shared<GenTasksOptions>();
  CLI::App* sub = app.add_subcommand("gen-tasks", "Build a task list (JSONL of task records)");
  sub->add_option("--template", options->template_id,
                  "expedia, bbc, custom, expedia-templates or questions")
      ->capture_default_str();
  sub->add_option("--count", options->count, "Number of tasks")->capture_default_str();
  sub->add_option("--client", options->client, "offline or openai (generation templates)")
      ->capture_default_str();
  sub->add_option("--model", options->model, "Generator model");
  sub->add_option("--temperature", options->temperature, "Generator temperature (default 1.0)");
  sub->add_option("--stall-rounds", options->stall_rounds,
                  "Give up after this many rounds without a new task (default 3)");
  sub->add_option("--prompt-file", options->prompt_file, "Generation prompt for custom");
  sub->add_option("--required-phrase", options->required_phrase,
                  "Phrase every custom task must contain");
  sub->add_option("--questions", options->questions_path, "Question file for questions");
  sub->add_option("--dataset", options->dataset, "Dataset name for questions (default file stem)");
  sub->add_option("-o,--out", options->out, "Output file (default stdout)");
  return {sub, [options, &globals] { return RunGenTasks(*options, globals); }};
}

}  // namespace arena::cli
