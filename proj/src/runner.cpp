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

#include "arena/runner.hpp"

#include <algorithm>
#include <thread>

#include "arena/error.hpp"

namespace arena::runner {
namespace {

[[noreturn]] void Violation(const std::string& message) {
  throw Error(ErrorCode::kProtocolViolation, message);
}

constexpr std::array<std::pair<RunExit, std::string_view>, 4> kExits = {{
    {RunExit::kCompleted, "completed"},
    {RunExit::kStepLimit, "step_limit"},
    {RunExit::kTimeout, "timeout"},
    {RunExit::kRunnerError, "runner_error"},
}};

Json Envelope(std::string_view type) {
  return {{"v", kProtocolVersion}, {"type", type}};
}

Clock::duration Seconds(double s) {
  return std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(s));
}

}  // namespace

std::string_view ToString(RunExit exit) {
  for (const auto& [value, token] : kExits) {
    if (value == exit) return token;
  }
  return "runner_error";
}

RunExit ParseRunExit(std::string_view text) {
  for (const auto& [value, token] : kExits) {
    if (token == text) return value;
  }
  Violation("unknown exit \"" + std::string(text) + "\"");
}

void ValidateRequest(const RunRequest& request) {
  if (request.max_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 1");
  }
  if (!(request.step_timeout_s > 0) || !(request.run_timeout_s > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "timeouts must be positive");
  }
  if (Trim(request.task.prompt).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "request has an empty task prompt");
  }
  if (request.model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "request has no model");
  }
}

Json RequestToJson(const RunRequest& request) {
  return {{"task", request.task},
          {"model", request.model},
          {"max_steps", request.max_steps},
          {"step_timeout", request.step_timeout_s},
          {"run_timeout", request.run_timeout_s},
          {"artifact_dir", request.artifact_dir}};
}

RunRequest RequestFromJson(const Json& doc) {
  try {
    RunRequest request;
    request.task = doc.at("task").get<TaskRecord>();
    request.model = doc.at("model").get<ModelId>();
    request.max_steps = doc.at("max_steps").get<int>();
    request.step_timeout_s = doc.at("step_timeout").get<double>();
    request.run_timeout_s = doc.at("run_timeout").get<double>();
    request.artifact_dir = doc.value("artifact_dir", std::string());
    ValidateRequest(request);
    return request;
  } catch (const Json::exception& e) {
    Violation(std::string("malformed request: ") + e.what());
  }
}

Json ResultToJson(const RunResult& result) {
  Json doc = {{"trace", TraceToJson(result.trace)},
              {"exit", ToString(result.exit)}};
  if (result.error_detail) doc["error_detail"] = *result.error_detail;
  return doc;
}

RunResult ResultFromJson(const Json& doc) {
  RunResult result;
  result.trace = TraceFromJson(doc.at("trace"));
  result.exit = ParseRunExit(doc.at("exit").get<std::string>());
  if (auto it = doc.find("error_detail"); it != doc.end() && it->is_string()) {
    result.error_detail = it->get<std::string>();
  }
  return result;
}

std::string EncodeFrame(const Json& body) {
  const std::string payload = body.dump();
  if (payload.size() > kMaxFrameBytes) Violation("frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += payload;
  return out;
}

Json MakeRequestFrame(const RunRequest& request) {
  Json frame = Envelope("request");
  frame["request"] = RequestToJson(request);
  return frame;
}

Json MakeStepFrame(const AgentStep& step) {
  Json frame = Envelope("step");
  frame["step"] = StepToJson(step);
  return frame;
}

Json MakeArtifactFrame(std::string_view kind, std::string_view key,
                       std::optional<int> step_index) {
  Json frame = Envelope("artifact");
  frame["kind"] = kind;
  frame["key"] = key;
  if (step_index) frame["step_index"] = *step_index;
  return frame;
}

Json MakeResultFrame(RunExit exit, std::optional<std::string> detail,
                     std::optional<double> wall_time) {
  Json frame = Envelope("result");
  frame["exit"] = ToString(exit);
  if (detail) frame["error_detail"] = *detail;
  if (wall_time) frame["wall_time"] = *wall_time;
  return frame;
}

void FrameDecoder::Feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<Json> FrameDecoder::Next() {
  if (pending() < 4) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                          (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
  if (n > kMaxFrameBytes) Violation("frame length " + std::to_string(n) + " too large");
  if (pending() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  const std::string_view payload(buffer_.data() + offset_ + 4, n);
  offset_ += 4 + n;
  Json frame;
  try {
    frame = Json::parse(payload);
  } catch (const Json::parse_error& e) {
    Violation(std::string("frame is not JSON: ") + e.what());
  }
  if (!frame.is_object() || !frame.contains("type") || !frame["type"].is_string()) {
    Violation("frame has no type");
  }
  if (frame.value("v", 0) != kProtocolVersion) {
    Violation("unsupported protocol version " + frame.value("v", Json()).dump());
  }
  const std::string type = frame["type"].get<std::string>();
  if (type != "request" && type != "step" && type != "artifact" &&
      type != "result") {
    Violation("unknown frame type \"" + type + "\"");
  }
  if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  return frame;
}

RunResult RunAgent(const RunRequest& request, RunnerEndpoint& endpoint,
                   std::stop_token stop, const ArtifactSink& sink) {
  ValidateRequest(request);
  std::unique_ptr<RunnerSession> session = endpoint.Start(request);
  const Clock::time_point start = Clock::now();
  const Clock::time_point run_deadline = start + Seconds(request.run_timeout_s);
  Clock::time_point last_frame = start;

  RunResult result;
  result.trace.task_id = request.task.id;
  result.trace.model = request.model;

  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  // Ends the run without a result frame from the runner.
  auto finish_early = [&](RunExit exit, std::string detail) {
    session->Cancel();
    RefreshFinalSuccess(result.trace);
    if (result.trace.ends_with_complete_task()) {
      exit = RunExit::kCompleted;
      detail = "result frame not received: " + detail;
    }
    result.exit = exit;
    result.error_detail = std::move(detail);
    result.trace.wall_time = elapsed();
    return result;
  };

  for (;;) {
    if (stop.stop_requested()) {
      return finish_early(RunExit::kRunnerError, "run cancelled");
    }
    const Clock::time_point step_deadline =
        last_frame + Seconds(request.step_timeout_s);
    const Clock::time_point deadline = std::min(run_deadline, step_deadline);
    // Waits in short slices so a stop request is noticed promptly.
    const Clock::time_point slice =
        std::min(deadline, Clock::now() + std::chrono::milliseconds(100));
    Poll poll = session->NextFrame(slice);
    if (poll.status == Poll::Status::kDeadline) {
      if (Clock::now() < deadline) continue;
      return finish_early(RunExit::kTimeout, deadline == run_deadline
                                                 ? "run timeout exceeded"
                                                 : "step timeout exceeded");
    }
    if (poll.status == Poll::Status::kClosed) {
      std::string detail = "runner closed the stream before sending a result";
      if (!poll.detail.empty()) detail += ": " + poll.detail;
      return finish_early(RunExit::kRunnerError, std::move(detail));
    }
    last_frame = Clock::now();
    const Json& frame = poll.frame;
    const std::string type = frame.value("type", std::string());

    if (type == "step") {
      if (!frame.contains("step")) Violation("step frame without a step");
      AgentStep step;
      try {
        step = StepFromJson(frame["step"]);
      } catch (const Error& e) {
        Violation(std::string("bad step: ") + e.what());
      }
      if (result.trace.ends_with_complete_task()) {
        Violation("step received after Complete Task");
      }
      if (step.index != static_cast<int>(result.trace.steps.size())) {
        Violation("expected step " + std::to_string(result.trace.steps.size()) +
                  ", got " + std::to_string(step.index));
      }
      if (static_cast<int>(result.trace.steps.size()) >= request.max_steps) {
        return finish_early(RunExit::kStepLimit, "runner exceeded max_steps");
      }
      result.trace.steps.push_back(std::move(step));
      RefreshFinalSuccess(result.trace);
      try {
        // The newest step may be action-less only while it is the last one.
        ValidateTrace(result.trace);
      } catch (const Error& e) {
        Violation(std::string("stream breaks trace invariants: ") + e.what());
      }
    } else if (type == "artifact") {
      const std::string kind = frame.value("kind", std::string());
      std::string key = frame.value("key", std::string());
      if (auto data = frame.find("data_b64"); data != frame.end()) {
        if (!sink) Violation("inline artifact but no artifact store");
        const std::string stored = sink(Base64Decode(data->get<std::string>()));
        if (!key.empty() && key != stored) Violation("artifact key mismatch");
        key = stored;
      }
      if (key.empty()) Violation("artifact frame without key");
      if (kind == "gif") {
        result.trace.gif_ref = key;
      } else if (kind == "screenshot") {
        const int index = frame.value("step_index", -1);
        if (index < 0 || index >= static_cast<int>(result.trace.steps.size())) {
          Violation("screenshot for unknown step");
        }
        result.trace.steps[static_cast<std::size_t>(index)].screenshot_ref = key;
      } else {
        Violation("unknown artifact kind \"" + kind + "\"");
      }
    } else if (type == "result") {
      const RunExit exit = ParseRunExit(frame.value("exit", std::string()));
      const bool terminal = result.trace.ends_with_complete_task();
      if ((exit == RunExit::kCompleted) != terminal) {
        Violation(terminal ? "trace ends with Complete Task but exit is " +
                                 std::string(ToString(exit))
                           : "exit completed without a Complete Task action");
      }
      result.exit = exit;
      if (auto it = frame.find("error_detail"); it != frame.end() && it->is_string()) {
        result.error_detail = it->get<std::string>();
      }
      if (auto it = frame.find("wall_time"); it != frame.end() && it->is_number()) {
        result.trace.wall_time = it->get<double>();
      } else {
        result.trace.wall_time = elapsed();
      }
      session->Cancel();
      return result;
    } else {
      Violation("unexpected \"" + type + "\" frame from runner");
    }
  }
}

std::pair<ModelId, ModelId> SamplePair(const std::vector<ModelId>& roster,
                                       std::mt19937_64& rng) {
  const std::uint64_t m = roster.size();
  if (m < 2) {
    throw Error(ErrorCode::kRosterTooSmall, "need at least two models to pair");
  }
  std::uint64_t k = UniformBelow(rng, m * (m - 1) / 2);
  // Decode k into the k-th pair (i < j) in lexicographic order.
  std::uint64_t i = 0;
  while (k >= m - 1 - i) {
    k -= m - 1 - i;
    ++i;
  }
  const std::uint64_t j = i + 1 + k;
  if (UniformBelow(rng, 2) == 0) return {roster[i], roster[j]};
  return {roster[j], roster[i]};
}

}  // namespace arena::runner
