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

// arena: command-line entry point for running the arena and its offline
// analyses. See docs/cli.md for the full flag reference.

#include <iostream>

#include "arena/error.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  using arena::cli::Command;
  CLI::App app{"Pairwise arena for LLM web agents.", "arena"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  arena::cli::Globals globals;
  app.add_option("--config", globals.config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  auto* seed = app.add_option("--seed", globals.seed,
                              "Seed for every random choice (pairing, bootstrap, sampling)");
  app.add_flag("-v,--verbose", globals.verbosity, "Progress messages on stderr");

  const std::vector<Command> commands = {
      arena::cli::AddServe(app, globals),  arena::cli::AddRank(app, globals),
      arena::cli::AddJudge(app, globals),  arena::cli::AddMine(app, globals),
      arena::cli::AddGenTasks(app, globals), arena::cli::AddAgree(app, globals),
      arena::cli::AddReplay(app, globals)};

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "arena: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  globals.seed_given = seed->count() > 0;

  for (const Command& command : commands) {
    if (!command.app->parsed()) continue;
    try {
      return command.run();
    } catch (const arena::Error& e) {
      std::cerr << "arena " << command.app->get_name() << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "arena " << command.app->get_name() << ": " << e.what() << "\n";
      return 1;
    }
  }
  std::cerr << app.help();
  return 2;
}
