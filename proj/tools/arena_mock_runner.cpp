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

// A scripted agent runner that speaks the frame protocol over stdin/stdout.
// Useful for exercising the service and SubprocessRunner without a browser.

#include <iostream>

#include <CLI11.hpp>

#include "arena/error.hpp"
#include "arena/runner.hpp"
#include "arena/util.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Scripted agent runner speaking the arena frame protocol"};
  std::string script_path;
  int steps = 2;
  std::string ending = "complete";
  bool fail = false;
  int delay_ms = 0;
  app.add_option("--script", script_path, "JSON mock script (overrides --steps)");
  app.add_option("--steps", steps, "Number of generic steps")->check(CLI::NonNegativeNumber);
  app.add_option("--ending", ending, "complete|hang|loop|crash|close")
      ->check(CLI::IsMember({"complete", "hang", "loop", "crash", "close"}));
  app.add_flag("--fail", fail, "Complete Task reports success=false");
  app.add_option("--delay-ms", delay_ms, "Delay before each step frame");
  CLI11_PARSE(app, argc, argv);

  try {
    arena::runner::MockScript script;
    if (!script_path.empty()) {
      script = arena::runner::MockScriptFromJson(
          arena::Json::parse(arena::ReadFile(script_path)));
    } else {
      script = arena::runner::MockScriptFromJson(
          {{"ending", {{"kind", ending}, {"success", !fail}}}});
      const auto parsed_ending = script.ending;
      script = arena::runner::GenericScript(steps, parsed_ending);
      script.step_delay = std::chrono::milliseconds(delay_ms);
    }
    arena::runner::ServeMockOverFd(script, 0, 1);
  } catch (const std::exception& e) {
    std::cerr << "arena_mock_runner: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
