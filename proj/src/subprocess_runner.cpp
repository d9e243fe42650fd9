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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "arena/error.hpp"
#include "arena/runner.hpp"

namespace arena::runner {
namespace {

// One child process. The child's stdin and stdout are both ends of a single
// socketpair, so writes use MSG_NOSIGNAL instead of touching SIGPIPE.
class SubprocessSession : public RunnerSession {
 public:
  SubprocessSession(pid_t pid, int fd) : pid_(pid), fd_(fd) {}

  ~SubprocessSession() override {
    Cancel();
    if (fd_ >= 0) ::close(fd_);
  }

  void Send(std::string_view bytes) {
    while (!bytes.empty()) {
      const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        throw Error(ErrorCode::kRunnerUnreachable,
                    std::string("runner closed its input: ") + std::strerror(errno));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  Poll NextFrame(Clock::time_point deadline) override {
    for (;;) {
      if (std::optional<Json> frame = decoder_.Next()) {
        return {Poll::Status::kFrame, std::move(*frame), {}};
      }
      if (eof_) return {Poll::Status::kClosed, {}, ExitDescription()};
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (remaining.count() <= 0) return {Poll::Status::kDeadline, {}, {}};
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0) continue;
      char buffer[8192];
      const ssize_t n = ::read(fd_, buffer, sizeof(buffer));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      decoder_.Feed(std::string_view(buffer, static_cast<std::size_t>(n)));
    }
  }

  void Cancel() override {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    Reap(0);
  }

 private:
  void Reap(int flags) {
    if (pid_ <= 0) return;
    int status = 0;
    pid_t got;
    do {
      got = ::waitpid(pid_, &status, flags);
    } while (got < 0 && errno == EINTR);
    if (got == pid_) {
      status_ = status;
      pid_ = -1;
    }
  }

  std::string ExitDescription() {
    Reap(0);
    if (!status_) return "runner closed its output";
    if (WIFEXITED(*status_)) {
      return "runner exited with status " + std::to_string(WEXITSTATUS(*status_));
    }
    if (WIFSIGNALED(*status_)) {
      return "runner killed by signal " + std::to_string(WTERMSIG(*status_));
    }
    return "runner closed its output";
  }

  pid_t pid_;
  int fd_;
  bool eof_ = false;
  std::optional<int> status_;
  FrameDecoder decoder_;
};

}  // namespace

std::string SubprocessRunner::Describe() const {
  std::string out = "subprocess:";
  for (std::size_t i = 0; i < argv_.size(); ++i) {
    if (i) out += ' ';
    out += argv_[i];
  }
  return out;
}

std::unique_ptr<RunnerSession> SubprocessRunner::Start(const RunRequest& request) {
  if (argv_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "subprocess runner needs a command");
  }
  int sockets[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sockets) != 0) {
    throw Error(ErrorCode::kRunnerUnreachable, "socketpair failed");
  }
  // Closed on a successful exec; carries errno back otherwise.
  int error_pipe[2];
  if (::pipe2(error_pipe, O_CLOEXEC) != 0) {
    ::close(sockets[0]);
    ::close(sockets[1]);
    throw Error(ErrorCode::kRunnerUnreachable, "pipe failed");
  }

  std::vector<char*> args;
  for (const std::string& arg : argv_) args.push_back(const_cast<char*>(arg.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {sockets[0], sockets[1], error_pipe[0], error_pipe[1]}) ::close(fd);
    throw Error(ErrorCode::kRunnerUnreachable, "fork failed");
  }
  if (pid == 0) {
    ::dup2(sockets[1], STDIN_FILENO);
    ::dup2(sockets[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int err = errno;
    [[maybe_unused]] ssize_t ignored = ::write(error_pipe[1], &err, sizeof(err));
    ::_exit(127);
  }

  ::close(sockets[1]);
  ::close(error_pipe[1]);
  int exec_errno = 0;
  ssize_t n;
  do {
    n = ::read(error_pipe[0], &exec_errno, sizeof(exec_errno));
  } while (n < 0 && errno == EINTR);
  ::close(error_pipe[0]);

  auto session = std::make_unique<SubprocessSession>(pid, sockets[0]);
  if (n > 0) {
    throw Error(ErrorCode::kRunnerUnreachable,
                "cannot start " + argv_[0] + ": " + std::strerror(exec_errno));
  }
  session->Send(EncodeFrame(MakeRequestFrame(request)));
  return session;
}

}  // namespace arena::runner
