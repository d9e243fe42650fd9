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

#ifndef ARENA_RUNNER_HPP_
#define ARENA_RUNNER_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stop_token>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arena/domain.hpp"

namespace arena::runner {

using Clock = std::chrono::steady_clock;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

struct RunLimits {
  int max_steps = 25;
  double step_timeout_s = 60.0;
  double run_timeout_s = 15.0 * 60.0;
};

struct RunRequest {
  TaskRecord task;
  ModelId model;
  int max_steps = 25;
  double step_timeout_s = 60.0;
  double run_timeout_s = 15.0 * 60.0;
  std::string artifact_dir;
};

void ValidateRequest(const RunRequest& request);

enum class RunExit { kCompleted, kStepLimit, kTimeout, kRunnerError };

std::string_view ToString(RunExit exit);
RunExit ParseRunExit(std::string_view text);

struct RunResult {
  AgentTrace trace;
  RunExit exit = RunExit::kRunnerError;
  std::optional<std::string> error_detail;
};

Json RequestToJson(const RunRequest& request);
RunRequest RequestFromJson(const Json& doc);
Json ResultToJson(const RunResult& result);
RunResult ResultFromJson(const Json& doc);

// ---------------------------------------------------------------------------
// Wire frames: a 4-byte big-endian length followed by that many bytes of
// UTF-8 JSON. Every body carries {"v": 1, "type": ...}.

std::string EncodeFrame(const Json& body);

Json MakeRequestFrame(const RunRequest& request);
Json MakeStepFrame(const AgentStep& step);
Json MakeArtifactFrame(std::string_view kind, std::string_view key,
                       std::optional<int> step_index = std::nullopt);
Json MakeResultFrame(RunExit exit, std::optional<std::string> detail = {},
                     std::optional<double> wall_time = {});

// Incremental decoder for a byte stream of frames. Throws ProtocolViolation
// on oversize lengths, malformed JSON or a missing/unknown "type".
class FrameDecoder {
 public:
  void Feed(std::string_view bytes);
  std::optional<Json> Next();
  // Bytes buffered but not yet forming a complete frame.
  std::size_t pending() const { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

// ---------------------------------------------------------------------------
// Runner endpoints. A session is one run; it yields frames until the result.

struct Poll {
  enum class Status { kFrame, kDeadline, kClosed };
  Status status = Status::kDeadline;
  Json frame;
  std::string detail;  // why the stream closed, when known
};

class RunnerSession {
 public:
  virtual ~RunnerSession() = default;
  virtual Poll NextFrame(Clock::time_point deadline) = 0;
  virtual void Cancel() = 0;
};

class RunnerEndpoint {
 public:
  virtual ~RunnerEndpoint() = default;
  // Throws RunnerUnreachable when no session can be opened.
  virtual std::unique_ptr<RunnerSession> Start(const RunRequest& request) = 0;
  virtual std::string Describe() const = 0;
};

// Stores artifact bytes delivered inline and returns their content key.
using ArtifactSink = std::function<std::string(std::string_view bytes)>;

// Drives one run to completion. Enforces run_timeout and step_timeout
// locally; a timeout returns the partial trace with exit = timeout. Throws
// RunnerUnreachable or ProtocolViolation.
RunResult RunAgent(const RunRequest& request, RunnerEndpoint& endpoint,
                   std::stop_token stop = {}, const ArtifactSink& sink = {});

// ---------------------------------------------------------------------------
// Offline runners.

// How a scripted run ends once its steps are exhausted.
struct MockEnding {
  enum class Kind {
    kComplete,  // append Complete Task(success) to the last step
    kHang,      // stop emitting frames entirely
    kLoop,      // keep emitting Wait steps forever
    kCrash,     // emit a runner_error result
    kClose,     // close the stream without a result
  };
  Kind kind = Kind::kComplete;
  bool success = true;
  std::string detail;
};

struct MockScript {
  // Steps are emitted in order with their index rewritten; each must carry
  // at least one action.
  std::vector<AgentStep> steps;
  MockEnding ending;
  std::chrono::milliseconds step_delay{0};
  std::optional<std::string> gif_key;
};

Json MockScriptToJson(const MockScript& script);
MockScript MockScriptFromJson(const Json& doc);

// Builds a plausible generic script: `steps` navigation steps mentioning the
// task, then the given ending.
MockScript GenericScript(int steps, MockEnding ending);

// The frames a MockScript produces for a request, generated lazily. Pure in
// (script, request).
class MockFrameSource {
 public:
  MockFrameSource(MockScript script, RunRequest request);
  // Frame number `n` (0-based), or nullopt when the stream ends or hangs.
  std::optional<Json> FrameAt(std::size_t n) const;
  bool hangs_after(std::size_t n) const;

 private:
  MockScript script_;
  RunRequest request_;
  std::vector<Json> prefix_;
  bool loops_ = false;
  bool hangs_ = false;
};

class MockRunner : public RunnerEndpoint {
 public:
  explicit MockRunner(MockScript script) : script_(std::move(script)) {}
  std::unique_ptr<RunnerSession> Start(const RunRequest& request) override;
  std::string Describe() const override { return "mock"; }

 private:
  MockScript script_;
};

// Replays a recorded trace verbatim, ending with the exit implied by it.
class ReplayRunner : public RunnerEndpoint {
 public:
  explicit ReplayRunner(AgentTrace trace,
                        std::optional<RunExit> exit = std::nullopt)
      : trace_(std::move(trace)), exit_(exit) {}
  std::unique_ptr<RunnerSession> Start(const RunRequest& request) override;
  std::string Describe() const override { return "replay"; }

 private:
  AgentTrace trace_;
  std::optional<RunExit> exit_;
};

// Spawns `argv` per run and speaks the frame protocol over its stdio.
class SubprocessRunner : public RunnerEndpoint {
 public:
  explicit SubprocessRunner(std::vector<std::string> argv)
      : argv_(std::move(argv)) {}
  std::unique_ptr<RunnerSession> Start(const RunRequest& request) override;
  std::string Describe() const override;

 private:
  std::vector<std::string> argv_;
};

// POSTs the request body to `<base_url>/run`; the response body is a stream
// of length-prefixed frames.
class HttpRunner : public RunnerEndpoint {
 public:
  explicit HttpRunner(std::string base_url) : base_url_(std::move(base_url)) {}
  std::unique_ptr<RunnerSession> Start(const RunRequest& request) override;
  std::string Describe() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
};

// Serves one request read from `in_fd` by writing frames to `out_fd`.
// The loop used by the standalone mock runner binary.
void ServeMockOverFd(const MockScript& script, int in_fd, int out_fd);

// ---------------------------------------------------------------------------

// Uniform over the C(M, 2) unordered pairs, then a fair coin for sides.
std::pair<ModelId, ModelId> SamplePair(const std::vector<ModelId>& roster,
                                       std::mt19937_64& rng);

}  // namespace arena::runner

#endif  // ARENA_RUNNER_HPP_
