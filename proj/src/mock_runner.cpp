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

#include <unistd.h>

#include <array>
#include <atomic>
#include <map>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "arena/error.hpp"
#include "arena/runner.hpp"

namespace arena::runner {
namespace {

constexpr std::array<std::pair<MockEnding::Kind, std::string_view>, 5> kEndings = {{
    {MockEnding::Kind::kComplete, "complete"},
    {MockEnding::Kind::kHang, "hang"},
    {MockEnding::Kind::kLoop, "loop"},
    {MockEnding::Kind::kCrash, "crash"},
    {MockEnding::Kind::kClose, "close"},
}};

AgentAction Action(ActionName name, Json params = Json::object()) {
  AgentAction action;
  action.name = name;
  action.params = std::move(params);
  return action;
}

AgentStep LoopStep(int index) {
  AgentStep step;
  step.index = index;
  step.prev_goal_eval = {GoalStatus::kUnknown, "Unknown - page still loading"};
  step.memory = "Waiting for the page to respond.";
  step.next_goal = "Wait and retry.";
  step.actions = {Action(ActionName::kWait, {{"seconds", 3}})};
  step.url = "about:blank";
  return step;
}

// Session over a MockFrameSource, pacing step frames by `delay`.
class ScriptedSession : public RunnerSession {
 public:
  ScriptedSession(MockFrameSource source, std::chrono::milliseconds delay)
      : source_(std::move(source)), delay_(delay), last_(Clock::now()) {}

  Poll NextFrame(Clock::time_point deadline) override {
    std::unique_lock<std::mutex> lock(mutex_);
    if (cancelled_) return {Poll::Status::kClosed, {}, "cancelled"};
    if (source_.hangs_after(next_)) {
      cv_.wait_until(lock, deadline, [&] { return cancelled_; });
      return {cancelled_ ? Poll::Status::kClosed : Poll::Status::kDeadline, {}, {}};
    }
    std::optional<Json> frame = source_.FrameAt(next_);
    if (!frame) return {Poll::Status::kClosed, {}, "stream ended"};
    const bool is_step = (*frame)["type"] == "step";
    const Clock::time_point ready = is_step ? last_ + delay_ : Clock::now();
    if (ready > deadline) {
      cv_.wait_until(lock, deadline, [&] { return cancelled_; });
      return {cancelled_ ? Poll::Status::kClosed : Poll::Status::kDeadline, {}, {}};
    }
    cv_.wait_until(lock, ready, [&] { return cancelled_; });
    if (cancelled_) return {Poll::Status::kClosed, {}, "cancelled"};
    if (is_step) last_ = ready;
    ++next_;
    return {Poll::Status::kFrame, std::move(*frame), {}};
  }

  void Cancel() override {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cancelled_ = true;
    }
    cv_.notify_all();
  }

 private:
  MockFrameSource source_;
  std::chrono::milliseconds delay_;
  Clock::time_point last_;
  std::size_t next_ = 0;
  bool cancelled_ = false;
  std::mutex mutex_;
  std::condition_variable cv_;
};

// Session that hands out a precomputed frame list without delay.
class FixedSession : public RunnerSession {
 public:
  explicit FixedSession(std::vector<Json> frames) : frames_(std::move(frames)) {}

  Poll NextFrame(Clock::time_point) override {
    if (cancelled_ || next_ >= frames_.size()) {
      return {Poll::Status::kClosed, {}, "replay finished"};
    }
    return {Poll::Status::kFrame, frames_[next_++], {}};
  }

  void Cancel() override { cancelled_ = true; }

 private:
  std::vector<Json> frames_;
  std::size_t next_ = 0;
  std::atomic<bool> cancelled_ = false;
};

void WriteAll(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n <= 0) throw Error(ErrorCode::kRunnerUnreachable, "write failed");
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

Json MockScriptToJson(const MockScript& script) {
  Json steps = Json::array();
  for (const AgentStep& step : script.steps) steps.push_back(StepToJson(step));
  std::string_view kind = "complete";
  for (const auto& [value, token] : kEndings) {
    if (value == script.ending.kind) kind = token;
  }
  Json doc = {{"steps", std::move(steps)},
              {"ending",
               {{"kind", kind},
                {"success", script.ending.success},
                {"detail", script.ending.detail}}},
              {"step_delay_ms", script.step_delay.count()}};
  if (script.gif_key) doc["gif_key"] = *script.gif_key;
  return doc;
}

MockScript MockScriptFromJson(const Json& doc) {
  MockScript script;
  for (const Json& step : doc.value("steps", Json::array())) {
    script.steps.push_back(StepFromJson(step));
  }
  const Json ending = doc.value("ending", Json::object());
  const std::string kind = ending.value("kind", std::string("complete"));
  bool found = false;
  for (const auto& [value, token] : kEndings) {
    if (token == kind) {
      script.ending.kind = value;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kInvalidArgument, "unknown mock ending " + kind);
  }
  script.ending.success = ending.value("success", true);
  script.ending.detail = ending.value("detail", std::string());
  script.step_delay = std::chrono::milliseconds(doc.value("step_delay_ms", 0));
  if (auto it = doc.find("gif_key"); it != doc.end() && it->is_string()) {
    script.gif_key = it->get<std::string>();
  }
  return script;
}

MockScript GenericScript(int steps, MockEnding ending) {
  MockScript script;
  script.ending = std::move(ending);
  for (int i = 0; i < steps; ++i) {
    AgentStep step;
    step.index = i;
    switch (i % 3) {
      case 0:
        step.prev_goal_eval = {GoalStatus::kUnknown, "Unknown - starting out"};
        step.memory = "Task: {{task}}";
        step.next_goal = "Search for a site that can answer the task.";
        step.actions = {Action(ActionName::kSearchGoogle, {{"query", "{{task}}"}})};
        step.url = "https://www.google.com/";
        break;
      case 1:
        step.prev_goal_eval = {GoalStatus::kSuccess, "Success - results are listed"};
        step.memory = "Found candidate pages for: {{task}}";
        step.next_goal = "Open the most relevant result.";
        step.actions = {Action(ActionName::kClickElementByIndex, {{"index", 7}})};
        step.url = "https://www.google.com/search";
        break;
      default:
        step.prev_goal_eval = {GoalStatus::kSuccess, "Success - page opened"};
        step.memory = "On a result page.";
        step.next_goal = "Extract the information the task asks for.";
        step.actions = {Action(ActionName::kExtractPageContent,
                               {{"goal", "{{task}}"}})};
        step.url = "https://example.com/result";
        break;
    }
    script.steps.push_back(std::move(step));
  }
  return script;
}

MockFrameSource::MockFrameSource(MockScript script, RunRequest request)
    : script_(std::move(script)), request_(std::move(request)) {
  const std::map<std::string, std::string> vars = {
      {"task", request_.task.prompt}, {"model", request_.model.name}};
  auto render = [&](const std::string& text) { return RenderTemplate(text, vars); };
  auto render_json = [&](Json params) {
    for (auto& [key, value] : params.items()) {
      if (value.is_string()) value = render(value.get<std::string>());
    }
    return params;
  };

  std::vector<AgentStep> steps = script_.steps;
  const MockEnding& ending = script_.ending;
  if (ending.kind == MockEnding::Kind::kComplete) {
    if (steps.empty()) {
      AgentStep report;
      report.prev_goal_eval = {GoalStatus::kUnknown, "Unknown - nothing to do"};
      report.memory = "Task: {{task}}";
      report.next_goal = "Report the result.";
      steps.push_back(std::move(report));
    }
    steps.back().actions.push_back(
        Action(ActionName::kCompleteTask,
               {{"success", ending.success},
                {"text", ending.success ? "Done: {{task}}" : "Could not finish."}}));
  }

  const int limit = request_.max_steps;
  int emitted = 0;
  bool completed = false;
  for (std::size_t i = 0; i < steps.size() && emitted < limit; ++i) {
    AgentStep step = steps[i];
    step.index = emitted++;
    step.memory = render(step.memory);
    step.next_goal = render(step.next_goal);
    step.prev_goal_eval.raw = render(step.prev_goal_eval.raw);
    for (auto& action : step.actions) action.params = render_json(action.params);
    completed = !step.actions.empty() &&
                step.actions.back().name == ActionName::kCompleteTask;
    prefix_.push_back(MakeStepFrame(step));
  }
  const double wall = static_cast<double>(emitted) *
                      std::chrono::duration<double>(script_.step_delay).count();
  auto finish = [&](RunExit exit, std::optional<std::string> detail) {
    if (script_.gif_key) prefix_.push_back(MakeArtifactFrame("gif", *script_.gif_key));
    prefix_.push_back(MakeResultFrame(exit, std::move(detail), wall));
  };

  if (completed) {
    finish(RunExit::kCompleted, std::nullopt);
  } else if (emitted >= limit && emitted < static_cast<int>(steps.size())) {
    finish(RunExit::kStepLimit, "max_steps reached");
  } else {
    switch (ending.kind) {
      case MockEnding::Kind::kComplete:  // only reachable when truncated
      case MockEnding::Kind::kCrash:
        finish(RunExit::kRunnerError,
               ending.detail.empty() ? "scripted crash" : ending.detail);
        break;
      case MockEnding::Kind::kHang:
        hangs_ = true;
        break;
      case MockEnding::Kind::kLoop:
        loops_ = true;
        break;
      case MockEnding::Kind::kClose:
        break;
    }
  }
}

std::optional<Json> MockFrameSource::FrameAt(std::size_t n) const {
  if (n < prefix_.size()) return prefix_[n];
  if (!loops_) return std::nullopt;
  const int index = static_cast<int>(script_.steps.size() + (n - prefix_.size()));
  if (index < request_.max_steps) return MakeStepFrame(LoopStep(index));
  if (index == request_.max_steps) {
    return MakeResultFrame(RunExit::kStepLimit, "max_steps reached");
  }
  return std::nullopt;
}

bool MockFrameSource::hangs_after(std::size_t n) const {
  return hangs_ && n >= prefix_.size();
}

std::unique_ptr<RunnerSession> MockRunner::Start(const RunRequest& request) {
  return std::make_unique<ScriptedSession>(MockFrameSource(script_, request),
                                           script_.step_delay);
}

std::unique_ptr<RunnerSession> ReplayRunner::Start(const RunRequest&) {
  // Replays the recorded steps verbatim; no template rendering or pacing.
  std::vector<Json> frames;
  for (const AgentStep& step : trace_.steps) frames.push_back(MakeStepFrame(step));
  if (trace_.gif_ref) frames.push_back(MakeArtifactFrame("gif", *trace_.gif_ref));
  const RunExit exit = exit_.value_or(
      trace_.ends_with_complete_task() ? RunExit::kCompleted : RunExit::kStepLimit);
  std::optional<std::string> detail;
  if (exit != RunExit::kCompleted) detail = "replayed trace has no Complete Task";
  frames.push_back(MakeResultFrame(exit, detail, trace_.wall_time));
  return std::make_unique<FixedSession>(std::move(frames));
}

void ServeMockOverFd(const MockScript& script, int in_fd, int out_fd) {
  FrameDecoder decoder;
  std::optional<Json> request_frame;
  char buffer[4096];
  while (!request_frame) {
    const ssize_t n = ::read(in_fd, buffer, sizeof(buffer));
    if (n <= 0) throw Error(ErrorCode::kProtocolViolation, "no request received");
    decoder.Feed(std::string_view(buffer, static_cast<std::size_t>(n)));
    request_frame = decoder.Next();
  }
  if ((*request_frame)["type"] != "request") {
    throw Error(ErrorCode::kProtocolViolation, "first frame must be a request");
  }
  const RunRequest request = RequestFromJson((*request_frame)["request"]);
  MockFrameSource source(script, request);
  for (std::size_t n = 0;; ++n) {
    if (source.hangs_after(n)) {
      for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
    }
    std::optional<Json> frame = source.FrameAt(n);
    if (!frame) return;
    if ((*frame)["type"] == "step") std::this_thread::sleep_for(script.step_delay);
    WriteAll(out_fd, EncodeFrame(*frame));
  }
}

}  // namespace arena::runner
