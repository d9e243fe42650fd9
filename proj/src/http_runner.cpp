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

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "arena/error.hpp"
#include "arena/runner.hpp"

namespace arena::runner {
namespace {

// Splits "http://host:port/prefix" into the client origin and path prefix.
std::pair<std::string, std::string> SplitUrl(const std::string& url) {
  const std::size_t scheme = url.find("://");
  const std::size_t path =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

// Runs the streaming POST on a background thread; frames are decoded as the
// body arrives and handed to NextFrame through a condition variable.
class HttpSession : public RunnerSession {
 public:
  HttpSession(const std::string& base_url, const RunRequest& request) {
    auto [origin, prefix] = SplitUrl(base_url);
    client_ = std::make_unique<httplib::Client>(origin);
    client_->set_connection_timeout(5);
    client_->set_read_timeout(static_cast<time_t>(request.run_timeout_s) + 5, 0);
    httplib::Request req;
    req.method = "POST";
    req.path = prefix + "/run";
    req.body = RequestToJson(request).dump();
    req.set_header("Content-Type", "application/json");
    req.content_receiver = [this](const char* data, std::size_t size,
                                  std::uint64_t, std::uint64_t) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (cancelled_) return false;
      bytes_.append(data, size);
      received_any_ = true;
      cv_.notify_all();
      return true;
    };
    worker_ = std::thread([this, req = std::move(req)] {
      httplib::Result result = client_->send(req);
      std::lock_guard<std::mutex> lock(mutex_);
      if (!result) {
        error_ = httplib::to_string(result.error());
        unreachable_ = !received_any_;
      } else if (result->status != 200) {
        error_ = "runner answered HTTP " + std::to_string(result->status);
        unreachable_ = true;
      }
      done_ = true;
      cv_.notify_all();
    });
  }

  ~HttpSession() override { Cancel(); }

  Poll NextFrame(Clock::time_point deadline) override {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
      if (!bytes_.empty()) {
        decoder_.Feed(bytes_);
        bytes_.clear();
      }
      if (std::optional<Json> frame = decoder_.Next()) {
        return {Poll::Status::kFrame, std::move(*frame), {}};
      }
      if (done_) {
        if (unreachable_ && !cancelled_) {
          throw Error(ErrorCode::kRunnerUnreachable, error_);
        }
        return {Poll::Status::kClosed, {}, error_.empty() ? "stream ended" : error_};
      }
      if (cv_.wait_until(lock, deadline) == std::cv_status::timeout &&
          bytes_.empty() && !done_) {
        return {Poll::Status::kDeadline, {}, {}};
      }
    }
  }

  void Cancel() override {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cancelled_ = true;
    }
    client_->stop();
    if (worker_.joinable()) worker_.join();
  }

 private:
  std::unique_ptr<httplib::Client> client_;
  std::thread worker_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::string bytes_;
  FrameDecoder decoder_;
  bool received_any_ = false;
  bool cancelled_ = false;
  bool done_ = false;
  bool unreachable_ = false;
  std::string error_;
};

}  // namespace

std::unique_ptr<RunnerSession> HttpRunner::Start(const RunRequest& request) {
  return std::make_unique<HttpSession>(base_url_, request);
}

}  // namespace arena::runner
